//! Arithmetic in GF(2^d), 1 ≤ d ≤ 8, with log/antilog tables.
//!
//! Elements are polynomials over GF(2) in the bits of a `u8`; addition is
//! XOR. The reduction polynomials are fixed so syndromes are reproducible:
//!
//! | d | polynomial            | hex   |
//! |---|-----------------------|-------|
//! | 1 | x + 1                 | 0x3   |
//! | 2 | x² + x + 1            | 0x7   |
//! | 3 | x³ + x + 1            | 0xB   |
//! | 4 | x⁴ + x + 1            | 0x13  |
//! | 5 | x⁵ + x² + 1           | 0x25  |
//! | 6 | x⁶ + x + 1            | 0x43  |
//! | 7 | x⁷ + x + 1            | 0x83  |
//! | 8 | x⁸ + x⁴ + x³ + x² + 1 | 0x11D |

use crate::error::{domain, Result};

pub const PRIMITIVE_POLYNOMIALS: [u16; 9] = [0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisField {
    d: u32,
    exp: Vec<u8>,
    log: Vec<u8>,
}

impl GaloisField {
    pub fn new(d: u32) -> Result<Self> {
        gf_ops(d)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Field size 2^d.
    pub fn order(&self) -> usize {
        1 << self.d
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.order() - 1;
        let s = self.log[a as usize] as usize + self.log[b as usize] as usize;
        self.exp[if s >= n { s - n } else { s }]
    }

    pub fn inv(&self, a: u8) -> Option<u8> {
        if a == 0 || a as usize >= self.order() {
            return None;
        }
        let n = self.order() - 1;
        let l = self.log[a as usize] as usize;
        Some(self.exp[(n - l) % n])
    }

    pub fn contains(&self, a: u8) -> bool {
        (a as usize) < self.order()
    }
}

pub fn gf_ops(d: u32) -> Result<GaloisField> {
    if !(1..=8).contains(&d) {
        return Err(domain(format!("GF(2^{d}) unsupported: d must lie in 1..=8")));
    }
    let order = 1usize << d;
    let poly = PRIMITIVE_POLYNOMIALS[d as usize] as usize;
    let mut exp = vec![0u8; order - 1];
    let mut log = vec![0u8; order];
    let mut x = 1usize;
    for (i, slot) in exp.iter_mut().enumerate() {
        *slot = x as u8;
        log[x] = i as u8;
        x <<= 1;
        if x & order != 0 {
            x ^= poly;
        }
    }
    Ok(GaloisField { d, exp, log })
}

/// Carry-less multiply followed by reduction; independent of the tables.
#[cfg(test)]
pub(crate) fn mul_by_reduction(d: u32, a: u8, b: u8) -> u8 {
    let poly = PRIMITIVE_POLYNOMIALS[d as usize] as u32;
    let mut prod = 0u32;
    for i in 0..d {
        if (b >> i) & 1 == 1 {
            prod ^= (a as u32) << i;
        }
    }
    for i in (d..2 * d).rev() {
        if (prod >> i) & 1 == 1 {
            prod ^= poly << (i - d);
        }
    }
    prod as u8
}
