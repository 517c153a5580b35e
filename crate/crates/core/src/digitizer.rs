//! d-bit digitization of standardized quadratures and the discrete
//! statistics of the resulting key symbols.
//!
//! Both parties' quadratures are standardized to unit variance; all the
//! correlation is carried by ρ. Given y, the partner variable is
//! N(ρy, 1 − ρ²), so p(k|y) is a difference of normal CDFs over the bin.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::normal;
use crate::quadrature::{GaussHermite, MAX_LEVEL};

/// Default cutoff of the uniform region, in standard deviations.
pub const DEFAULT_ALPHA: f64 = 5.0;

/// Probabilities below this are floored before taking logarithms.
const PROB_FLOOR: f64 = 1e-300;

/// Outer-quadrature convergence target on H(k|y).
const ADAPTIVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DigitizationGrid {
    d: u32,
    alpha: f64,
    edges: Vec<f64>,
}

impl DigitizationGrid {
    pub fn new(d: u32, alpha: f64) -> Result<Self> {
        build_grid(d, alpha)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// All 2^d + 1 boundaries, from −∞ to +∞.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    fn interior(&self) -> &[f64] {
        &self.edges[1..self.edges.len() - 1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteStats {
    pub h_k: f64,
    pub h_k_given_y: f64,
    pub v_k_given_y: f64,
    pub i_ky: f64,
    /// Outer quadrature nodes used for the conditional moments.
    pub nodes: usize,
}

pub fn build_grid(d: u32, alpha: f64) -> Result<DigitizationGrid> {
    if d == 0 {
        return Err(domain("digitization needs at least one bit"));
    }
    if d > 16 {
        return Err(domain(format!("digitization depth {d} is unsupported (max 16)")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(domain(format!("cutoff alpha = {alpha} must be positive")));
    }
    let bins = 1usize << d;
    let mut edges = Vec::with_capacity(bins + 1);
    edges.push(f64::NEG_INFINITY);
    if d == 1 {
        edges.push(0.0);
    } else {
        let width = 2.0 * alpha / (bins - 2) as f64;
        let half = (bins / 2 - 1) as isize;
        edges.extend((-half..=half).map(|i| i as f64 * width));
        // Pin the end points exactly.
        edges[1] = -alpha;
        edges[bins - 1] = alpha;
    }
    edges.push(f64::INFINITY);
    Ok(DigitizationGrid { d, alpha, edges })
}

/// Bin index of `x`; bins are left-closed, so an edge belongs to the bin on
/// its right.
pub fn digitize(x: f64, grid: &DigitizationGrid) -> Result<usize> {
    if x.is_nan() {
        return Err(domain("cannot digitize NaN"));
    }
    Ok(grid.interior().partition_point(|&e| e <= x))
}

/// Joint heterodyne symbol k_q·2^d + k_p.
pub fn concatenate(k_q: u64, k_p: u64, d: u32) -> Result<u64> {
    if d == 0 || d > 31 {
        return Err(domain(format!("unsupported digitization depth {d}")));
    }
    let size = 1u64 << d;
    if k_q >= size || k_p >= size {
        return Err(domain(format!("symbols ({k_q}, {k_p}) out of range for d = {d}")));
    }
    Ok(k_q * size + k_p)
}

pub fn split(symbol: u64, d: u32) -> Result<(u64, u64)> {
    if d == 0 || d > 31 {
        return Err(domain(format!("unsupported digitization depth {d}")));
    }
    let size = 1u64 << d;
    if symbol >= size * size {
        return Err(domain(format!("symbol {symbol} out of range for d = {d}")));
    }
    Ok((symbol / size, symbol % size))
}

/// p(k) for a standard normal variable.
pub fn bin_probabilities(grid: &DigitizationGrid) -> Vec<f64> {
    grid.edges
        .windows(2)
        .map(|e| normal::interval_mass(e[0], e[1]))
        .collect()
}

fn surprisal(p: f64) -> f64 {
    -p.max(PROB_FLOOR).log2()
}

pub fn entropy_of(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p * surprisal(p))
        .sum()
}

pub fn marginal_entropy(grid: &DigitizationGrid) -> f64 {
    entropy_of(&bin_probabilities(grid))
}

/// p(k|y) for every bin, written into `out`.
pub fn conditional_probabilities(grid: &DigitizationGrid, rho: f64, y: f64, out: &mut Vec<f64>) {
    let s = (1.0 - rho * rho).sqrt();
    let mean = rho * y;
    out.clear();
    out.extend(
        grid.edges
            .windows(2)
            .map(|e| normal::interval_mass((e[0] - mean) / s, (e[1] - mean) / s)),
    );
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_nan() || !(0.0..1.0).contains(&rho) {
        return Err(domain(format!(
            "correlation rho = {rho} must lie in [0, 1); the conditional is degenerate otherwise"
        )));
    }
    Ok(())
}

/// (E[−log₂ p(k|y)], E[(log₂ p(k|y))²]) under one fixed outer rule.
fn conditional_moments(grid: &DigitizationGrid, rho: f64, rule: &GaussHermite) -> (f64, f64) {
    let mut probs = Vec::with_capacity(grid.bins());
    let (mut first, mut second) = (0.0, 0.0);
    for (&y, &w) in rule.nodes().iter().zip(rule.weights()) {
        if w == 0.0 {
            continue;
        }
        conditional_probabilities(grid, rho, y, &mut probs);
        let (mut h, mut s2) = (0.0, 0.0);
        for &p in &probs {
            if p > 0.0 {
                let info = surprisal(p);
                h += p * info;
                s2 += p * info * info;
            }
        }
        first += w * h;
        second += w * s2;
    }
    (first, second)
}

fn assemble(h_k: f64, (first, second): (f64, f64), nodes: usize) -> DiscreteStats {
    let v = (second - first * first).max(0.0);
    DiscreteStats {
        h_k,
        h_k_given_y: first,
        v_k_given_y: v,
        i_ky: (h_k - first).max(0.0),
        nodes,
    }
}

/// H(k|y), V(k|y) with a fixed outer Gauss–Hermite rule.
pub fn conditional_stats_with_rule(
    grid: &DigitizationGrid,
    rho: f64,
    rule: &GaussHermite,
) -> Result<DiscreteStats> {
    check_rho(rho)?;
    let moments = conditional_moments(grid, rho, rule);
    Ok(assemble(marginal_entropy(grid), moments, rule.len()))
}

/// H(k), H(k|y), V(k|y) and I(k:y). The outer rule starts at 201 nodes and
/// doubles until H(k|y) moves by less than 1e-8.
pub fn conditional_stats(grid: &DigitizationGrid, rho: f64) -> Result<DiscreteStats> {
    check_rho(rho)?;
    let h_k = marginal_entropy(grid);
    if rho == 0.0 {
        // Independence: the inner sum does not depend on y.
        let probs = bin_probabilities(grid);
        let first = entropy_of(&probs);
        let second = probs
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * surprisal(p).powi(2))
            .sum();
        return Ok(assemble(h_k, (first, second), 1));
    }
    let mut level = 0;
    let mut moments = conditional_moments(grid, rho, GaussHermite::cached(level));
    while level < MAX_LEVEL {
        let next = conditional_moments(grid, rho, GaussHermite::cached(level + 1));
        level += 1;
        let delta = (next.0 - moments.0).abs();
        moments = next;
        if delta < ADAPTIVE_TOL {
            break;
        }
    }
    Ok(assemble(h_k, moments, GaussHermite::cached(level).len()))
}

/// ζ_digit = h·I(k:y) / I(x:y).
pub fn zeta_digit(stats: &DiscreteStats, h: u32, i_gauss: f64) -> Result<f64> {
    if !(i_gauss > 0.0) {
        return Err(domain(format!(
            "Gaussian mutual information {i_gauss} must be positive"
        )));
    }
    let z = f64::from(h) * stats.i_ky / i_gauss;
    if z > 1.0 + 1e-9 {
        return Err(domain(format!(
            "digitized information exceeds the Gaussian bound (ζ_digit = {z})"
        )));
    }
    Ok(z.min(1.0))
}
