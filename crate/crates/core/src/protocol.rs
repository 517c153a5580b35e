//! Protocol and channel parameterization.
//!
//! All variances are in shot-noise units (vacuum = 1). The channel is the
//! entangling-cloner attack: a beamsplitter of transmissivity τ mixing the
//! signal with one arm of a two-mode squeezed vacuum of variance ω.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::normal;

/// Homodyne measures one quadrature (h = 1), heterodyne both (h = 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Detection {
    #[serde(rename = "hom")]
    Homodyne,
    #[serde(rename = "het")]
    Heterodyne,
}

impl Detection {
    pub fn h(self) -> u32 {
        match self {
            Detection::Homodyne => 1,
            Detection::Heterodyne => 2,
        }
    }

    pub fn hf(self) -> f64 {
        f64::from(self.h())
    }
}

/// Which party's data defines the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "dr")]
    Direct,
    #[serde(rename = "rr")]
    Reverse,
}

/// How Bob's detector enters Eve's conditional state under reverse
/// reconciliation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorModel {
    /// Detector loss and electronic noise are trusted: Eve conditions on the
    /// noisy detector output.
    #[default]
    #[serde(rename = "trusted")]
    Trusted,
    /// Eve conditions on the ideal pre-detector mode.
    #[serde(rename = "ideal")]
    Ideal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub detection: Detection,
    pub direction: Direction,
    /// Digitization bits per quadrature.
    pub d: u32,
    pub eps_s: f64,
    pub eps_h: f64,
    pub eps_cor: f64,
    pub eps_pe: f64,
    /// Probability that error correction succeeds.
    pub p_ec: f64,
    pub eta_d: f64,
    pub u_el: f64,
    pub detector_model: DetectorModel,
}

pub const DEFAULT_EPS: f64 = 2.328_306_436_538_696_3e-10; // 2^-32

impl Default for ProtocolConfig {
    /// Homodyne DR, d = 4, p_ec = 0.9, all epsilons 2⁻³², η_d = 0.8, u_el = 0.01.
    fn default() -> Self {
        Self {
            detection: Detection::Homodyne,
            direction: Direction::Direct,
            d: 4,
            eps_s: DEFAULT_EPS,
            eps_h: DEFAULT_EPS,
            eps_cor: DEFAULT_EPS,
            eps_pe: DEFAULT_EPS,
            p_ec: 0.9,
            eta_d: 0.8,
            u_el: 0.01,
            detector_model: DetectorModel::Trusted,
        }
    }
}

impl ProtocolConfig {
    pub fn h(&self) -> u32 {
        self.detection.h()
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(domain("digitization depth d must be at least 1"));
        }
        for (name, eps) in [
            ("eps_s", self.eps_s),
            ("eps_h", self.eps_h),
            ("eps_cor", self.eps_cor),
            ("eps_pe", self.eps_pe),
        ] {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(domain(format!("{name} = {eps} must lie in (0, 1)")));
            }
        }
        if !(self.p_ec > 0.0 && self.p_ec <= 1.0) {
            return Err(domain(format!("p_ec = {} must lie in (0, 1]", self.p_ec)));
        }
        if !(self.eta_d > 0.0 && self.eta_d <= 1.0) {
            return Err(domain(format!("eta_d = {} must lie in (0, 1]", self.eta_d)));
        }
        if !(self.u_el >= 0.0 && self.u_el.is_finite()) {
            return Err(domain(format!("u_el = {} must be non-negative", self.u_el)));
        }
        Ok(())
    }
}

/// Channel and modulation. `omega` is derived from (τ, ξ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub tau: f64,
    pub xi: f64,
    /// Gaussian modulation variance.
    pub v: f64,
}

impl ChannelParams {
    pub fn new(tau: f64, xi: f64, v: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(domain(format!("transmissivity {tau} must lie in (0, 1]")));
        }
        if !(xi >= 0.0 && xi.is_finite()) {
            return Err(domain(format!("excess noise {xi} must be non-negative")));
        }
        if !(v >= 0.0 && v.is_finite()) {
            return Err(domain(format!("modulation variance {v} must be non-negative")));
        }
        Ok(Self { tau, xi, v })
    }

    pub fn omega(&self) -> Result<f64> {
        omega_from_xi(self.tau, self.xi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalModel {
    pub snr: f64,
    /// Correlation between the standardized quadratures of Alice and Bob.
    pub rho: f64,
    /// Gaussian mutual information I(x:y) in bits per channel use.
    pub mutual_info_gauss: f64,
}

pub fn loss_db_to_tau(loss_db: f64) -> Result<f64> {
    if !(loss_db >= 0.0 && loss_db.is_finite()) {
        return Err(domain(format!("loss {loss_db} dB must be a non-negative number")));
    }
    Ok(10f64.powf(-loss_db / 10.0))
}

pub fn tau_to_loss_db(tau: f64) -> f64 {
    -10.0 * tau.log10()
}

/// Eve's thermal variance ω = 1 + τξ/(1 − τ).
pub fn omega_from_xi(tau: f64, xi: f64) -> Result<f64> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(domain(format!("transmissivity {tau} must lie in (0, 1]")));
    }
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(domain(format!("excess noise {xi} must be non-negative")));
    }
    if tau == 1.0 {
        if xi == 0.0 {
            return Ok(1.0);
        }
        return Err(Error::Singular(format!(
            "identity channel (τ = 1) cannot carry excess noise ξ = {xi}"
        )));
    }
    Ok(1.0 + tau * xi / (1.0 - tau))
}

/// Per-quadrature SNR at Bob with a trusted detector of efficiency η_d and
/// electronic noise u_el. Heterodyne pays one extra vacuum unit.
pub fn signal_model(cfg: &ProtocolConfig, ch: &ChannelParams) -> SignalModel {
    let h = cfg.detection.hf();
    let gain = cfg.eta_d * ch.tau;
    let snr = gain * ch.v / (h * (1.0 + cfg.u_el) + gain * ch.xi);
    SignalModel {
        snr,
        rho: (snr / (1.0 + snr)).sqrt(),
        mutual_info_gauss: 0.5 * h * (1.0 + snr).log2(),
    }
}

/// Worst-case (τ, ξ) after estimating the channel from `m` sacrificed signals,
/// at confidence 1 − ε_pe.
///
/// Bob's per-quadrature outcome is modeled as y = s·x + z with s² = η_d·τ/h and
/// Var z = 1 + u_el + η_d·τ·ξ/h. The gain is lowered and the noise raised by
/// w = Φ⁻¹(1 − ε_pe) standard deviations of their estimators.
pub fn worst_case_params(ch: &ChannelParams, cfg: &ProtocolConfig, m: u64) -> Result<(f64, f64)> {
    if m < 2 {
        return Err(domain(format!(
            "parameter estimation needs at least 2 samples, got {m}"
        )));
    }
    if ch.v <= 0.0 {
        return Err(domain("parameter estimation needs a positive modulation variance"));
    }
    let h = cfg.detection.hf();
    let mf = m as f64;
    // ε_pe ≥ 1/2 would make the bound optimistic; it never beats the nominal channel.
    let w = normal::upper_quantile(cfg.eps_pe).max(0.0);

    let gain = (cfg.eta_d * ch.tau / h).sqrt();
    let noise = 1.0 + cfg.u_el + cfg.eta_d * ch.tau * ch.xi / h;

    let gain_wc = gain - w * (noise / (mf * ch.v)).sqrt();
    if gain_wc <= 0.0 {
        return Err(Error::Infeasible(format!(
            "{m} estimation samples cannot bound the transmissivity away from zero"
        )));
    }
    let noise_wc = noise + w * noise * (2.0 / mf).sqrt();

    let tau_wc = (h * gain_wc * gain_wc / cfg.eta_d).min(ch.tau);
    let xi_wc = (h * (noise_wc - 1.0 - cfg.u_el) / (cfg.eta_d * tau_wc)).max(ch.xi);
    Ok((tau_wc, xi_wc))
}
