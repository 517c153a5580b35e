//! Finite-size one-way error-correction leakage for non-binary alphabets.
//!
//! The syndrome must carry n·h·H(k|y) bits to first order, plus a √n
//! second-order term driven by the conditional entropy variance and a
//! ½·log₂(hn) third-order term. The third-order term is charged at its upper
//! end so the leakage is never understated.

use serde::{Deserialize, Serialize};

use crate::digitizer::DiscreteStats;
use crate::error::{domain, Error, Result};
use crate::normal;

/// Probability that a wrong key survives verification or EC aborts:
/// 1 − p_ec·(1 − ε_cor).
pub fn epsilon_ec(p_ec: f64, eps_cor: f64) -> f64 {
    1.0 - p_ec * (1.0 - eps_cor)
}

/// √(h·V(k|y))·Φ⁻¹(1 − ε_ec), negative once ε_ec exceeds ½.
pub fn delta_leak(v_ky: f64, h: u32, eps_ec: f64) -> f64 {
    if v_ky == 0.0 {
        return 0.0;
    }
    (f64::from(h) * v_ky).sqrt() * normal::upper_quantile(eps_ec)
}

/// δ(n) = ½·log₂(h·n), with the O(1) constant dropped.
pub fn delta_n(n: u64, h: u32) -> f64 {
    0.5 * (f64::from(h) * n as f64).log2()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageBits {
    pub n: u64,
    pub leak_bits: f64,
    pub delta_leak: f64,
    pub delta_n: f64,
    pub eps_ec: f64,
}

pub fn tight_leakage_bits(n: u64, h: u32, h_ky: f64, v_ky: f64, eps_ec: f64) -> Result<LeakageBits> {
    if n < 2 {
        return Err(domain(format!("block size n = {n} must be at least 2")));
    }
    let dl = delta_leak(v_ky, h, eps_ec);
    let dn = delta_n(n, h);
    let nf = n as f64;
    Ok(LeakageBits {
        n,
        leak_bits: nf * f64::from(h) * h_ky + nf.sqrt() * dl + dn,
        delta_leak: dl,
        delta_n: dn,
        eps_ec,
    })
}

/// ζ_leak = 1 − Δ_leak / (√n·h·I(k:y)).
pub fn zeta_leak(i_ky: f64, h: u32, n: u64, delta_leak_val: f64) -> Result<f64> {
    if !(i_ky > 0.0) {
        return Err(domain(format!("I(k:y) = {i_ky} must be positive")));
    }
    Ok(1.0 - delta_leak_val / ((n as f64).sqrt() * f64::from(h) * i_ky))
}

/// Unchecked R*_synd; may be ≥ 1 at hopeless operating points.
pub fn syndrome_rate_raw(h_ky: f64, v_ky: f64, d: u32, h: u32, n: u64, eps_ec: f64) -> f64 {
    let (df, hf, nf) = (f64::from(d), f64::from(h), n as f64);
    h_ky / df + delta_leak(v_ky, h, eps_ec) / (df * hf * nf.sqrt()) + delta_n(n, h) / (df * hf * nf)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyndromeRates {
    pub r_synd_star: f64,
    pub r_code_star: f64,
}

pub fn optimal_syndrome_rate(
    h_ky: f64,
    v_ky: f64,
    d: u32,
    h: u32,
    n: u64,
    eps_ec: f64,
) -> Result<SyndromeRates> {
    if d == 0 {
        return Err(domain("d must be at least 1"));
    }
    if !(0.0..=f64::from(d) + 1e-12).contains(&h_ky) {
        return Err(domain(format!("H(k|y) = {h_ky} must lie in [0, d]")));
    }
    if n < 2 {
        return Err(domain(format!("block size n = {n} must be at least 2")));
    }
    let r_synd_star = syndrome_rate_raw(h_ky, v_ky, d, h, n, eps_ec);
    if r_synd_star >= 1.0 {
        return Err(Error::Infeasible(format!(
            "optimal syndrome rate {r_synd_star:.4} ≥ 1: no positive-rate code exists"
        )));
    }
    Ok(SyndromeRates {
        r_synd_star,
        r_code_star: 1.0 - r_synd_star,
    })
}

pub fn reconciliation_efficiency(zeta_digit: f64, zeta_leak: f64) -> f64 {
    zeta_digit * zeta_leak
}

/// Everything the leakage accounting produces for one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakageBudget {
    pub n: u64,
    pub leak_bits: f64,
    pub delta_leak: f64,
    pub delta_n: f64,
    pub eps_ec: f64,
    pub zeta_digit: f64,
    pub zeta_leak: f64,
    pub zeta: f64,
    pub r_synd_star: f64,
    pub r_code_star: f64,
}

impl LeakageBudget {
    /// Assembles the budget; `r_code_star` is left unclipped (negative when
    /// no code can reach the point).
    pub fn new(
        stats: &DiscreteStats,
        d: u32,
        h: u32,
        n: u64,
        eps_ec: f64,
        i_gauss: f64,
    ) -> Result<Self> {
        let bits = tight_leakage_bits(n, h, stats.h_k_given_y, stats.v_k_given_y, eps_ec)?;
        let zd = crate::digitizer::zeta_digit(stats, h, i_gauss)?;
        let zl = zeta_leak(stats.i_ky, h, n, bits.delta_leak)?;
        let r_synd_star = syndrome_rate_raw(stats.h_k_given_y, stats.v_k_given_y, d, h, n, eps_ec);
        Ok(Self {
            n,
            leak_bits: bits.leak_bits,
            delta_leak: bits.delta_leak,
            delta_n: bits.delta_n,
            eps_ec,
            zeta_digit: zd,
            zeta_leak: zl,
            zeta: reconciliation_efficiency(zd, zl),
            r_synd_star,
            r_code_star: 1.0 - r_synd_star,
        })
    }
}
