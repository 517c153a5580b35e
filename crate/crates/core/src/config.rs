//! JSON run configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keyrate::SearchBounds;
use crate::protocol::{Detection, DetectorModel, Direction, ProtocolConfig, DEFAULT_EPS};

/// A single JSON document describing a protocol and channel point. Missing
/// keys fall back to the defaults; unknown keys are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub detection: Detection,
    pub direction: Direction,
    pub d: u32,
    pub eps_s: f64,
    pub eps_h: f64,
    pub eps_cor: f64,
    pub eps_pe: f64,
    pub p_ec: f64,
    pub eta_d: f64,
    pub u_el: f64,
    pub detector_model: DetectorModel,
    pub xi: f64,
    pub loss_db: f64,
    /// Modulation variance; optimized when absent.
    #[serde(rename = "V", skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(rename = "N")]
    pub big_n: u64,
    /// Kept fraction n/N; optimized when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_ratio: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = ProtocolConfig::default();
        Self {
            detection: p.detection,
            direction: p.direction,
            d: p.d,
            eps_s: DEFAULT_EPS,
            eps_h: DEFAULT_EPS,
            eps_cor: DEFAULT_EPS,
            eps_pe: DEFAULT_EPS,
            p_ec: p.p_ec,
            eta_d: p.eta_d,
            u_el: p.u_el,
            detector_model: p.detector_model,
            xi: 0.01,
            loss_db: 0.02,
            v: None,
            big_n: 200_000,
            n_ratio: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig {
            detection: self.detection,
            direction: self.direction,
            d: self.d,
            eps_s: self.eps_s,
            eps_h: self.eps_h,
            eps_cor: self.eps_cor,
            eps_pe: self.eps_pe,
            p_ec: self.p_ec,
            eta_d: self.eta_d,
            u_el: self.u_el,
            detector_model: self.detector_model,
        }
    }

    /// Default search ranges with any fixed V or n/N pinned.
    pub fn bounds(&self) -> SearchBounds {
        let mut b = SearchBounds::default();
        if let Some(v) = self.v {
            b.v = (v, v);
        }
        if let Some(q) = self.n_ratio {
            b.ratio = (q, q);
        }
        b
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.protocol().validate().or_else(|e| bad(e.to_string()))?;
        if !(self.xi >= 0.0 && self.xi.is_finite()) {
            return bad(format!("xi = {} must be a non-negative number", self.xi));
        }
        if !(self.loss_db >= 0.0 && self.loss_db.is_finite()) {
            return bad(format!("loss_db = {} must be a non-negative number", self.loss_db));
        }
        if self.loss_db == 0.0 && self.xi > 0.0 {
            return bad("loss_db = 0 with xi > 0 has no entangling-cloner model; use a positive loss".into());
        }
        if let Some(v) = self.v {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("V = {v} must be positive"));
            }
        }
        if self.big_n < 4 {
            return bad(format!("N = {} must be at least 4", self.big_n));
        }
        if let Some(q) = self.n_ratio {
            if !(q > 0.0 && q < 1.0) {
                return bad(format!("n_ratio = {q} must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}
