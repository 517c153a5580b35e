//! Composable finite-size key rate and its optimization.
//!
//! Per signal after parameter estimation,
//!
//! ```text
//! r_n = h·I(k:y) − χ(τ_wc, ξ_wc) − Δ_leak/√n − Δ_aep/√n + θ/n
//! R   = p_ec·(n/N)·r_n       (0 when r_n ≤ 0)
//! ```
//!
//! where the N − n sacrificed signals set the worst-case channel (τ_wc, ξ_wc)
//! that enters Eve's Holevo information.

use std::thread;

use serde::{Deserialize, Serialize};

use crate::digitizer::{self, DigitizationGrid, DiscreteStats, DEFAULT_ALPHA};
use crate::error::{domain, Error, Result};
use crate::holevo;
use crate::leakage::{self, LeakageBudget};
use crate::ldpc::sparse_storage_bits;
use crate::protocol::{self, ChannelParams, ProtocolConfig, SignalModel};

/// Column weight assumed when predicting sparse storage.
pub const DEFAULT_COLUMN_WEIGHT: f64 = 2.0;

/// Δ_aep = 4·log₂(√(2^{hd}) + 2)·√(log₂(2/ε_s²)).
pub fn aep_delta(d: u32, h: u32, eps_s: f64) -> f64 {
    let alphabet = 2f64.powf(0.5 * f64::from(h * d));
    let log_term = 1.0 - 2.0 * eps_s.log2();
    4.0 * (alphabet + 2.0).log2() * log_term.sqrt()
}

/// θ = log₂(2·ε_h²·ε_cor).
pub fn theta(eps_h: f64, eps_cor: f64) -> f64 {
    1.0 + 2.0 * eps_h.log2() + eps_cor.log2()
}

/// h·I(k:y) − χ − Δ_leak/√n.
pub fn asymptotic_rate_explicit(h: u32, i_ky: f64, chi: f64, delta_leak: f64, n: u64) -> f64 {
    f64::from(h) * i_ky - chi - delta_leak / (n as f64).sqrt()
}

/// ζ·I(x:y) − χ.
pub fn asymptotic_rate_zeta(zeta: f64, i_gauss: f64, chi: f64) -> f64 {
    zeta * i_gauss - chi
}

/// R^{ε_pe+ε_ec}_∞ with the worst-case channel already substituted.
pub fn asymptotic_rate_pe_ec(
    cfg: &ProtocolConfig,
    ch_wc: &ChannelParams,
    stats: &DiscreteStats,
    n: u64,
) -> Result<f64> {
    let chi = holevo::holevo_bound(cfg, ch_wc)?.chi;
    let eps_ec = leakage::epsilon_ec(cfg.p_ec, cfg.eps_cor);
    let dl = leakage::delta_leak(stats.v_k_given_y, cfg.h(), eps_ec);
    Ok(asymptotic_rate_explicit(cfg.h(), stats.i_ky, chi, dl, n))
}

/// One evaluated operating point with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub loss_db: f64,
    #[serde(rename = "N")]
    pub big_n: u64,
    pub n: u64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "R_infty_pe_ec")]
    pub r_infty_pe_ec: f64,
    pub r_n: f64,
    #[serde(rename = "R")]
    pub rate: f64,
    pub zeta: f64,
    pub zeta_digit: f64,
    pub zeta_leak: f64,
    pub snr: f64,
    pub i_gauss: f64,
    pub h_k_given_y: f64,
    pub v_k_given_y: f64,
    pub chi: f64,
    pub tau_wc: f64,
    pub xi_wc: f64,
    pub leak_bits: f64,
    #[serde(rename = "R_synd_star")]
    pub r_synd_star: f64,
    #[serde(rename = "R_code_star")]
    pub r_code_star: f64,
    pub m_sparse_star_bits: f64,
    pub feasible: bool,
}

impl RatePoint {
    /// p_ec·(n/N)·r_n before clipping at zero.
    pub fn objective(&self, p_ec: f64) -> f64 {
        p_ec * (self.n as f64 / self.big_n as f64) * self.r_n
    }
}

/// Whether Eve's information uses the worst-case or the nominal channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimation {
    WorstCase,
    Nominal,
}

/// Rate evaluator for a fixed protocol and nominal channel (τ, ξ).
#[derive(Debug, Clone)]
pub struct RateEngine {
    cfg: ProtocolConfig,
    grid: DigitizationGrid,
    tau: f64,
    xi: f64,
    estimation: Estimation,
}

impl RateEngine {
    pub fn new(cfg: ProtocolConfig, tau: f64, xi: f64) -> Result<Self> {
        cfg.validate()?;
        ChannelParams::new(tau, xi, 1.0)?;
        Ok(Self {
            grid: DigitizationGrid::new(cfg.d, DEFAULT_ALPHA)?,
            cfg,
            tau,
            xi,
            estimation: Estimation::WorstCase,
        })
    }

    pub fn at_loss(cfg: ProtocolConfig, loss_db: f64, xi: f64) -> Result<Self> {
        Self::new(cfg, protocol::loss_db_to_tau(loss_db)?, xi)
    }

    pub fn with_estimation(mut self, estimation: Estimation) -> Self {
        self.estimation = estimation;
        self
    }

    pub fn config(&self) -> &ProtocolConfig {
        &self.cfg
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn loss_db(&self) -> f64 {
        protocol::tau_to_loss_db(self.tau)
    }

    /// SNR and digitized statistics at modulation `v`; independent of n.
    pub fn signal(&self, v: f64) -> Result<(SignalModel, DiscreteStats)> {
        let ch = ChannelParams::new(self.tau, self.xi, v)?;
        let sig = protocol::signal_model(&self.cfg, &ch);
        let stats = digitizer::conditional_stats(&self.grid, sig.rho)?;
        Ok((sig, stats))
    }

    /// Finite-size rate at (N, n, V).
    pub fn evaluate(&self, big_n: u64, n: u64, v: f64) -> Result<RatePoint> {
        let (sig, stats) = self.signal(v)?;
        self.evaluate_with(big_n, n, v, &sig, &stats)
    }

    pub fn evaluate_with(
        &self,
        big_n: u64,
        n: u64,
        v: f64,
        sig: &SignalModel,
        stats: &DiscreteStats,
    ) -> Result<RatePoint> {
        if n < 2 || n > big_n {
            return Err(domain(format!("need 2 ≤ n ≤ N, got n = {n}, N = {big_n}")));
        }
        let cfg = &self.cfg;
        let h = cfg.h();
        let nominal = ChannelParams::new(self.tau, self.xi, v)?;
        let (tau_wc, xi_wc) = match self.estimation {
            Estimation::WorstCase => protocol::worst_case_params(&nominal, cfg, big_n - n)?,
            Estimation::Nominal => (self.tau, self.xi),
        };
        let ch_wc = ChannelParams::new(tau_wc, xi_wc, v)?;
        let chi = holevo::holevo_bound(cfg, &ch_wc)?.chi;

        let eps_ec = leakage::epsilon_ec(cfg.p_ec, cfg.eps_cor);
        let budget = LeakageBudget::new(stats, cfg.d, h, n, eps_ec, sig.mutual_info_gauss)?;

        let r_infty = asymptotic_rate_explicit(h, stats.i_ky, chi, budget.delta_leak, n);
        let nf = n as f64;
        let r_n = r_infty - aep_delta(cfg.d, h, cfg.eps_s) / nf.sqrt() + theta(cfg.eps_h, cfg.eps_cor) / nf;
        let objective = cfg.p_ec * (nf / big_n as f64) * r_n;
        let rate = objective.max(0.0);
        let hn = f64::from(h) * nf;

        Ok(RatePoint {
            loss_db: self.loss_db(),
            big_n,
            n,
            v,
            r_infty_pe_ec: r_infty,
            r_n,
            rate,
            zeta: budget.zeta,
            zeta_digit: budget.zeta_digit,
            zeta_leak: budget.zeta_leak,
            snr: sig.snr,
            i_gauss: sig.mutual_info_gauss,
            h_k_given_y: stats.h_k_given_y,
            v_k_given_y: stats.v_k_given_y,
            chi,
            tau_wc,
            xi_wc,
            leak_bits: budget.leak_bits,
            r_synd_star: budget.r_synd_star,
            r_code_star: budget.r_code_star,
            m_sparse_star_bits: sparse_storage_bits(hn, cfg.d, DEFAULT_COLUMN_WEIGHT, budget.r_synd_star),
            feasible: rate > 0.0,
        })
    }
}

/// Rate at one explicit operating point; V is taken from `ch`.
pub fn finite_rate(cfg: &ProtocolConfig, ch: &ChannelParams, big_n: u64, n: u64) -> Result<RatePoint> {
    RateEngine::new(*cfg, ch.tau, ch.xi)?.evaluate(big_n, n, ch.v)
}

/// Search ranges for the modulation variance and the kept fraction n/N.
/// Equal endpoints pin that axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub v: (f64, f64),
    pub ratio: (f64, f64),
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self { v: (0.5, 100.0), ratio: (0.5, 0.95) }
    }
}

pub const V_GRID_POINTS: usize = 25;
pub const RATIO_GRID_POINTS: usize = 15;
const GOLDEN_ITERS: usize = 40;

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if lo == hi || count < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

fn lin_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if lo == hi || count < 2 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

fn kept_signals(ratio: f64, big_n: u64) -> u64 {
    ((ratio * big_n as f64).round() as u64).clamp(2, big_n.saturating_sub(2).max(2))
}

/// Points whose estimation step cannot bound the channel are skipped by the
/// optimizer rather than aborting it.
fn admissible(r: Result<RatePoint>) -> Result<Option<RatePoint>> {
    match r {
        Ok(p) => Ok(Some(p)),
        Err(Error::Infeasible(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Golden-section maximization of `f` on [a, b].
pub fn golden_max<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..GOLDEN_ITERS {
        if (b - a).abs() <= tol {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc >= fd { (c, fc) } else { (d, fd) })
}

/// Maximizes R over V and n/N: a 25 × 15 grid (log-spaced in V) followed by
/// golden-section refinement along each axis around the best cell. When no
/// point is positive the least negative p_ec·(n/N)·r_n is returned, flagged
/// infeasible.
pub fn optimize(engine: &RateEngine, big_n: u64, bounds: &SearchBounds) -> Result<RatePoint> {
    let (v_lo, v_hi) = bounds.v;
    let (q_lo, q_hi) = bounds.ratio;
    if !(v_lo > 0.0 && v_lo <= v_hi) || !(q_lo > 0.0 && q_lo <= q_hi && q_hi <= 1.0) {
        return Err(domain(format!("invalid search bounds {bounds:?}")));
    }
    if big_n < 4 {
        return Err(domain(format!("block of N = {big_n} signals is too small")));
    }
    let p_ec = engine.config().p_ec;
    let vs = log_grid(v_lo, v_hi, V_GRID_POINTS);
    let qs = lin_grid(q_lo, q_hi, RATIO_GRID_POINTS);

    let mut best: Option<(usize, usize, RatePoint)> = None;
    for (i, &v) in vs.iter().enumerate() {
        let (sig, stats) = engine.signal(v)?;
        for (j, &q) in qs.iter().enumerate() {
            let Some(p) = admissible(engine.evaluate_with(big_n, kept_signals(q, big_n), v, &sig, &stats))? else {
                continue;
            };
            if best.as_ref().is_none_or(|(_, _, b)| p.objective(p_ec) > b.objective(p_ec)) {
                best = Some((i, j, p));
            }
        }
    }
    let Some((i, j, mut best)) = best else {
        return Err(Error::Infeasible(format!(
            "no admissible operating point for N = {big_n}: too few signals for parameter estimation"
        )));
    };

    let bracket = |grid: &[f64], k: usize| (grid[k.saturating_sub(1)], grid[(k + 1).min(grid.len() - 1)]);
    let (va, vb) = bracket(&vs, i);
    let (qa, qb) = bracket(&qs, j);

    for _ in 0..2 {
        if va < vb {
            let q = best.n as f64 / big_n as f64;
            let mut seen = best;
            golden_max(
                |log_v| {
                    let v = log_v.exp();
                    let Some(p) = admissible(engine.evaluate(big_n, kept_signals(q, big_n), v))? else {
                        return Ok(f64::NEG_INFINITY);
                    };
                    if p.objective(p_ec) > seen.objective(p_ec) {
                        seen = p;
                    }
                    Ok(p.objective(p_ec))
                },
                va.ln(),
                vb.ln(),
                1e-4,
            )?;
            best = seen;
        }
        if qa < qb {
            let v = best.v;
            let (sig, stats) = engine.signal(v)?;
            let mut seen = best;
            golden_max(
                |q| {
                    let Some(p) = admissible(engine.evaluate_with(big_n, kept_signals(q, big_n), v, &sig, &stats))? else {
                        return Ok(f64::NEG_INFINITY);
                    };
                    if p.objective(p_ec) > seen.objective(p_ec) {
                        seen = p;
                    }
                    Ok(p.objective(p_ec))
                },
                qa,
                qb,
                0.5 / big_n as f64,
            )?;
            best = seen;
        }
    }
    Ok(best)
}

/// Which quantity a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "loss_db")]
    LossDb,
    #[serde(rename = "N")]
    BlockSize,
}

impl SweepAxis {
    pub fn column(self) -> &'static str {
        match self {
            SweepAxis::LossDb => "loss_db",
            SweepAxis::BlockSize => "N",
        }
    }

    pub fn value(self, p: &RatePoint) -> f64 {
        match self {
            SweepAxis::LossDb => p.loss_db,
            SweepAxis::BlockSize => p.big_n as f64,
        }
    }
}

/// Quantities held fixed along a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepFixed {
    pub xi: f64,
    pub loss_db: f64,
    pub big_n: u64,
    pub bounds: SearchBounds,
}

/// One optimized point per axis value, in input order. Points are evaluated
/// on all available cores.
pub fn sweep(
    cfg: &ProtocolConfig,
    axis: SweepAxis,
    values: &[f64],
    fixed: &SweepFixed,
) -> Result<Vec<RatePoint>> {
    if values.is_empty() {
        return Err(domain("sweep range is empty"));
    }
    let point = |x: f64| -> Result<RatePoint> {
        let (loss_db, big_n) = match axis {
            SweepAxis::LossDb => (x, fixed.big_n),
            SweepAxis::BlockSize => {
                if !(x >= 4.0 && x.fract() == 0.0) {
                    return Err(domain(format!("block size {x} must be an integer ≥ 4")));
                }
                (fixed.loss_db, x as u64)
            }
        };
        let engine = RateEngine::at_loss(*cfg, loss_db, fixed.xi)?;
        let mut p = optimize(&engine, big_n, &fixed.bounds)?;
        p.loss_db = loss_db;
        Ok(p)
    };
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(values.len());
    let chunk = values.len().div_ceil(workers);
    thread::scope(|s| {
        let handles: Vec<_> = values
            .chunks(chunk)
            .map(|xs| s.spawn(move || xs.iter().map(|&x| point(x)).collect::<Result<Vec<_>>>()))
            .collect();
        let mut out = Vec::with_capacity(values.len());
        for h in handles {
            out.extend(h.join().expect("sweep worker panicked")?);
        }
        Ok(out)
    })
}

/// Largest axis value with a positive rate, if any.
pub fn last_positive(points: &[RatePoint], axis: SweepAxis) -> Option<f64> {
    points.iter().filter(|p| p.feasible).map(|p| axis.value(p)).reduce(f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{Detection, Direction};

    #[test]
    fn aep_examples() {
        let eps = 2f64.powi(-32);
        let want = 4.0 * 6f64.log2() * 65f64.sqrt();
        assert!((aep_delta(4, 1, eps) - want).abs() < 1e-12);
        assert!((aep_delta(4, 1, eps) - 83.37).abs() < 0.01);
        assert!((aep_delta(1, 1, eps) - 4.0 * (2f64.sqrt() + 2.0).log2() * 65f64.sqrt()).abs() < 1e-12);
        assert!((aep_delta(1, 1, eps) - 57.13).abs() < 0.01);
        // ε_s → 1: √log₂(2) = 1.
        assert!((aep_delta(3, 2, 1.0) - 4.0 * (8f64 + 2.0).log2()).abs() < 1e-12);
    }

    #[test]
    fn theta_examples() {
        let e32 = 2f64.powi(-32);
        assert_eq!(theta(e32, e32), -95.0);
        assert_eq!(theta(2f64.powi(-16), 2f64.powi(-16)), -47.0);
        assert!(theta(0.5f64.sqrt(), 1.0).abs() < 1e-15);
    }

    #[test]
    fn explicit_and_zeta_forms_agree() {
        let cfg = ProtocolConfig::default();
        let engine = RateEngine::at_loss(cfg, 0.5, 0.01).unwrap();
        for &(v, n) in &[(2.0, 10_000u64), (10.0, 150_000), (40.0, 1_000_000)] {
            let p = engine.evaluate(2 * n, n, v).unwrap();
            let z = asymptotic_rate_zeta(p.zeta, p.i_gauss, p.chi);
            assert!((z - p.r_infty_pe_ec).abs() < 1e-12, "{z} vs {}", p.r_infty_pe_ec);
        }
    }

    #[test]
    fn zero_penalty_limit() {
        assert_eq!(asymptotic_rate_explicit(2, 1.25, 0.0, 0.0, 100), 2.5);
    }

    #[test]
    fn clipping_rule() {
        let cfg = ProtocolConfig::default();
        // Far beyond the DR limit nothing survives.
        let engine = RateEngine::at_loss(cfg, 6.0, 0.01).unwrap();
        let p = engine.evaluate(200_000, 140_000, 10.0).unwrap();
        assert!(p.r_n < 0.0);
        assert_eq!(p.rate, 0.0);
        assert!(!p.feasible);
    }

    #[test]
    fn default_point_positive() {
        let cfg = ProtocolConfig::default();
        let engine = RateEngine::at_loss(cfg, 0.02, 0.01).unwrap();
        let p = optimize(&engine, 200_000, &SearchBounds::default()).unwrap();
        assert!(p.rate > 0.0, "{p:?}");
        assert!(p.r_infty_pe_ec > 0.0);
    }

    #[test]
    fn refinement_never_loses_to_grid() {
        let cfg = ProtocolConfig::default();
        let engine = RateEngine::at_loss(cfg, 0.3, 0.01).unwrap();
        let best = optimize(&engine, 100_000, &SearchBounds::default()).unwrap();
        for v in log_grid(0.5, 100.0, V_GRID_POINTS) {
            for q in lin_grid(0.5, 0.95, RATIO_GRID_POINTS) {
                let p = engine.evaluate(100_000, kept_signals(q, 100_000), v).unwrap();
                assert!(p.objective(cfg.p_ec) <= best.objective(cfg.p_ec) + 1e-15);
            }
        }
    }

    #[test]
    fn pinned_axes() {
        let cfg = ProtocolConfig { direction: Direction::Reverse, detection: Detection::Heterodyne, ..Default::default() };
        let engine = RateEngine::at_loss(cfg, 0.5, 0.01).unwrap();
        let p = optimize(&engine, 100_000, &SearchBounds { v: (5.0, 5.0), ratio: (0.7, 0.7) }).unwrap();
        assert_eq!(p.v, 5.0);
        assert_eq!(p.n, 70_000);
        assert!(optimize(&engine, 100_000, &SearchBounds { v: (5.0, 1.0), ratio: (0.5, 0.9) }).is_err());
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_max(|x| Ok(-(x - 0.3) * (x - 0.3)), -1.0, 2.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() < 1e-6 && fx <= 0.0);
    }
}
