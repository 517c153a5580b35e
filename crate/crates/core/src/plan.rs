//! Choosing a regular LDPC code for an operating point.

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::keyrate::{optimize, RateEngine};
use crate::ldpc::{design_rate, predicted_storage};

/// Largest row weight considered when matching a target code rate.
pub const MAX_ROW_WEIGHT: u32 = 4096;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularChoice {
    pub d_v: u32,
    pub d_c: u32,
    pub design_rate: f64,
}

/// Row weight whose design rate 1 − d_v/d_c is closest to `target`; ties go
/// to the smaller d_c.
pub fn nearest_regular(target: f64, d_v: u32) -> Result<RegularChoice> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Infeasible(format!("target code rate {target} is outside (0, 1)")));
    }
    if d_v == 0 {
        return Err(Error::Domain("column weight must be positive".into()));
    }
    let mut best: Option<RegularChoice> = None;
    for d_c in d_v + 1..=MAX_ROW_WEIGHT.max(d_v + 1) {
        let rate = design_rate(f64::from(d_v), f64::from(d_c))?;
        let better = best.is_none_or(|b| (rate - target).abs() < (b.design_rate - target).abs() - TIE_TOL);
        if better {
            best = Some(RegularChoice { d_v, d_c, design_rate: rate });
        } else if rate > target {
            break;
        }
    }
    Ok(best.expect("range is non-empty"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodePlan {
    pub loss_db: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "N")]
    pub big_n: u64,
    pub n: u64,
    pub hn: u64,
    pub h_k_given_y: f64,
    pub v_k_given_y: f64,
    pub r_synd_star: f64,
    pub r_code_star: f64,
    pub choice: RegularChoice,
    pub m_dense_star_bits: f64,
    pub m_sparse_star_bits: f64,
}

/// Works out the optimal syndrome rate at the configured point and the
/// closest regular (d_v, d_c). V and n/N are optimized unless pinned.
pub fn code_plan(cfg: &RunConfig, d_v: u32) -> Result<CodePlan> {
    cfg.validate()?;
    let proto = cfg.protocol();
    let engine = RateEngine::at_loss(proto, cfg.loss_db, cfg.xi)?;
    let point = optimize(&engine, cfg.big_n, &cfg.bounds())?;
    let h = proto.h();
    if point.r_synd_star >= 1.0 {
        return Err(Error::Infeasible(format!(
            "R*_synd = {:.4} ≥ 1 at {} dB: no code can reconcile this point",
            point.r_synd_star, cfg.loss_db
        )));
    }
    let choice = nearest_regular(point.r_code_star, d_v)?;
    let (dense, sparse) = predicted_storage(point.n as f64, h, proto.d, f64::from(d_v), point.r_synd_star)?;
    Ok(CodePlan {
        loss_db: cfg.loss_db,
        v: point.v,
        big_n: point.big_n,
        n: point.n,
        hn: u64::from(h) * point.n,
        h_k_given_y: point.h_k_given_y,
        v_k_given_y: point.v_k_given_y,
        r_synd_star: point.r_synd_star,
        r_code_star: point.r_code_star,
        choice,
        m_dense_star_bits: dense,
        m_sparse_star_bits: sparse,
    })
}
