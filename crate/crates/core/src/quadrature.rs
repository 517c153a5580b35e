//! Gauss–Hermite quadrature against the standard normal density.
//!
//! Nodes come from safeguarded Newton iteration on the orthonormal Hermite
//! recurrence. The recurrence is rescaled on the fly so that rules with
//! thousands of nodes do not overflow; far-tail weights simply underflow to
//! zero.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Node count of the base rule used by the digitizer.
pub const BASE_NODES: usize = 201;
/// Number of cached doublings above [`BASE_NODES`].
pub const MAX_LEVEL: usize = 5;

/// Quadrature rule for E[f(Y)] with Y ~ N(0, 1).
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature needs at least one node");
        let (x, w) = physicists_rule(n);
        let scale = PI.sqrt().recip();
        let nodes = x.iter().map(|&x| x * std::f64::consts::SQRT_2).collect();
        let weights = w.iter().map(|&w| w * scale).collect();
        Self { nodes, weights }
    }

    /// Shared rule with `BASE_NODES · 2^level` nodes.
    pub fn cached(level: usize) -> &'static GaussHermite {
        static RULES: [OnceLock<GaussHermite>; MAX_LEVEL + 1] =
            [const { OnceLock::new() }; MAX_LEVEL + 1];
        assert!(level <= MAX_LEVEL, "quadrature level {level} exceeds {MAX_LEVEL}");
        RULES[level].get_or_init(|| GaussHermite::new(BASE_NODES << level))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| w > 0.0)
            .map(|(&y, &w)| w * f(y))
            .sum()
    }
}

/// Orthonormal Hermite value p_n(z) and derivative, both divided by
/// e^{log_scale}.
fn hermite(coef: &[(f64, f64)], z: f64) -> (f64, f64, f64) {
    const RESCALE: f64 = 1e150;
    let n = coef.len();
    let mut p1 = PI.powf(-0.25);
    let mut p2 = 0.0;
    let mut log_scale = 0.0;
    for &(a, b) in coef {
        let p3 = p2;
        p2 = p1;
        p1 = z * a * p2 - b * p3;
        if p1.abs() > RESCALE {
            p1 /= RESCALE;
            p2 /= RESCALE;
            log_scale += RESCALE.ln();
        }
    }
    (p1, (2.0 * n as f64).sqrt() * p2, log_scale)
}

/// Root of p_n inside a sign-change bracket, by Newton with bisection
/// fallback. Returns the root and the scaled derivative there.
fn bracketed_root(coef: &[(f64, f64)], mut lo: f64, mut hi: f64, f_lo: f64) -> (f64, f64, f64) {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (p, dp, _) = hermite(coef, x);
        if p == 0.0 {
            break;
        }
        if (p > 0.0) == (f_lo > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - p / dp;
        let next = if newton > lo.min(hi) && newton < lo.max(hi) { newton } else { 0.5 * (lo + hi) };
        // Newton converges quadratically: one step below 1e-9 lands at
        // machine precision.
        let done = next == newton && (next - x).abs() <= 1e-9 * x.abs().max(1.0);
        x = next;
        if done {
            break;
        }
    }
    let (_, dp, log_scale) = hermite(coef, x);
    (x, dp, log_scale)
}

/// Nodes (descending) and weights for ∫ e^{−x²} f(x) dx.
///
/// Positive roots are located by stepping down from √(2n+1) in increments
/// a quarter of the local zero spacing π/√(2n+1−x²) until p_n changes sign.
fn physicists_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let coef: Vec<(f64, f64)> = (1..=n)
        .map(|j| {
            let jf = j as f64;
            ((2.0 / jf).sqrt(), ((jf - 1.0) / jf).sqrt())
        })
        .collect();
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let edge_step = 0.25 * nf.powf(-1.0 / 6.0);
    let mut z = (2.0 * nf + 1.0).sqrt();
    let (mut f_z, _, _) = hermite(&coef, z);

    for i in 0..n / 2 {
        let (root, dp, log_scale) = loop {
            let gap = (2.0 * nf + 1.0 - z * z).max(1e-300).sqrt();
            let step = (0.25 * PI / gap).min(edge_step).min(0.5 * z.max(1e-3));
            let next = z - step;
            let (f_next, _, _) = hermite(&coef, next);
            if (f_next > 0.0) != (f_z > 0.0) {
                let found = bracketed_root(&coef, next, z, f_next);
                z = next;
                f_z = f_next;
                break found;
            }
            z = next;
            f_z = f_next;
        };
        x[i] = root;
        x[n - 1 - i] = -root;
        let weight = (2f64.ln() - 2.0 * (dp.abs().ln() + log_scale)).exp();
        w[i] = weight;
        w[n - 1 - i] = weight;
    }
    if n % 2 == 1 {
        let (_, dp, log_scale) = hermite(&coef, 0.0);
        x[n / 2] = 0.0;
        w[n / 2] = (2f64.ln() - 2.0 * (dp.abs().ln() + log_scale)).exp();
    }
    (x, w)
}
