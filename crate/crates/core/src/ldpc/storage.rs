//! Memory models for storing a parity-check matrix at the encoder.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

use super::code::LdpcCode;

/// ⌈log₂ x⌉ for x ≥ 1 (real-valued to allow mean degrees).
pub fn ceil_log2(x: f64) -> f64 {
    if x <= 1.0 {
        return 0.0;
    }
    let c = x.log2().ceil();
    // Guard against log2 rounding just above an exact power of two.
    if 2f64.powf(c - 1.0) >= x {
        c - 1.0
    } else {
        c
    }
}

/// R_design = 1 − d_v/d_c; also accepts mean degrees of irregular codes.
pub fn design_rate(d_v: f64, d_c: f64) -> Result<f64> {
    if !(d_v > 0.0 && d_v < d_c && d_c.is_finite()) {
        return Err(domain(format!("design rate needs 0 < d_v < d_c, got ({d_v}, {d_c})")));
    }
    Ok(1.0 - d_v / d_c)
}

/// Dense storage (hn)²·d·R_synd bits.
pub fn dense_storage_bits(hn: f64, d: u32, r_synd: f64) -> f64 {
    hn * hn * f64::from(d) * r_synd
}

/// CRS storage: nonzero symbols, column indices and row pointers.
pub fn sparse_storage_bits(hn: f64, d: u32, d_v_bar: f64, r_synd: f64) -> f64 {
    d_v_bar * hn * f64::from(d)
        + d_v_bar * hn * ceil_log2(hn)
        + (hn * r_synd + 1.0) * ceil_log2(d_v_bar * hn)
}

/// (M*_code, M*_sparse) for block size n, evaluated at the optimal R*_synd.
pub fn predicted_storage(n: f64, h: u32, d: u32, d_v_bar: f64, r_synd_star: f64) -> Result<(f64, f64)> {
    if !(r_synd_star > 0.0 && r_synd_star < 1.0) {
        return Err(domain(format!("R*_synd = {r_synd_star} must lie in (0, 1)")));
    }
    let hn = f64::from(h) * n;
    Ok((
        dense_storage_bits(hn, d, r_synd_star),
        sparse_storage_bits(hn, d, d_v_bar, r_synd_star),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StorageReport {
    pub m_dense_bits: f64,
    pub m_sparse_bits: f64,
    pub m_dense_star_bits: f64,
    pub m_sparse_star_bits: f64,
    pub serialized_bytes: u64,
}

impl StorageReport {
    /// Model values for `code` alongside the prediction from R*_synd.
    pub fn for_code(code: &LdpcCode, r_synd_star: f64, serialized_bytes: u64) -> Result<Self> {
        let hn = code.n_cols() as f64;
        let r_synd = code.syndrome_rate();
        let d_v = f64::from(code.d_v());
        Ok(Self {
            m_dense_bits: dense_storage_bits(hn, code.d(), r_synd),
            m_sparse_bits: sparse_storage_bits(hn, code.d(), d_v, r_synd),
            m_dense_star_bits: dense_storage_bits(hn, code.d(), r_synd_star),
            m_sparse_star_bits: sparse_storage_bits(hn, code.d(), d_v, r_synd_star),
            serialized_bytes,
        })
    }
}

pub const BITS_PER_MB: f64 = 8e6;
pub const BITS_PER_GB: f64 = 8e9;
