//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use cvqkd_core::digitizer::digitize;
use cvqkd_core::ldpc::PRIMITIVE_POLYNOMIALS;
use cvqkd_core::normal;
use cvqkd_core::{DigitizationGrid, Detection, Direction};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

// ---------------------------------------------------------------- Gaussian states

fn tmsv_into(g: &mut DMatrix<f64>, a: usize, b: usize, x: f64) {
    let c = (x * x - 1.0).max(0.0).sqrt();
    for k in 0..2 {
        g[(2 * a + k, 2 * a + k)] = x;
        g[(2 * b + k, 2 * b + k)] = x;
    }
    g[(2 * a, 2 * b)] = c;
    g[(2 * b, 2 * a)] = c;
    g[(2 * a + 1, 2 * b + 1)] = -c;
    g[(2 * b + 1, 2 * a + 1)] = -c;
}

/// Applies a beamsplitter of transmissivity `t` to modes (i, j).
fn beamsplitter(g: &DMatrix<f64>, i: usize, j: usize, t: f64) -> DMatrix<f64> {
    let n = g.nrows();
    let mut s = DMatrix::<f64>::identity(n, n);
    let (a, b) = (t.sqrt(), (1.0 - t).sqrt());
    for k in 0..2 {
        let (x, y) = (2 * i + k, 2 * j + k);
        s[(x, x)] = a;
        s[(x, y)] = b;
        s[(y, x)] = -b;
        s[(y, y)] = a;
    }
    &s * g * s.transpose()
}

fn select(g: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| g[(rows[r], cols[c])])
}

/// Γ_E − C (M + noise)⁻¹ Cᵀ for measuring the quadratures `meas`.
fn condition(g: &DMatrix<f64>, keep: &[usize], meas: &[usize], noise: f64) -> DMatrix<f64> {
    let ge = select(g, keep, keep);
    let c = select(g, keep, meas);
    let m = select(g, meas, meas) + DMatrix::<f64>::identity(meas.len(), meas.len()) * noise;
    let minv = m.try_inverse().expect("measurement block invertible");
    ge - &c * minv * c.transpose()
}

/// Symplectic spectrum from the complex eigenvalues ±iν of ΩΓ.
pub fn symplectic_spectrum(g: &DMatrix<f64>) -> Vec<f64> {
    let n = g.nrows();
    let mut omega = DMatrix::<f64>::zeros(n, n);
    for k in 0..n / 2 {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    let mut nu: Vec<f64> = (&omega * g).complex_eigenvalues().iter().map(|z| z.im.abs()).collect();
    nu.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nu.into_iter().step_by(2).collect()
}

pub fn entropy_bits(g: &DMatrix<f64>) -> f64 {
    symplectic_spectrum(g)
        .into_iter()
        .map(|nu| {
            if nu <= 1.0 + 1e-12 {
                0.0
            } else {
                let (a, b) = ((nu + 1.0) / 2.0, (nu - 1.0) / 2.0);
                a * a.log2() - b * b.log2()
            }
        })
        .sum()
}

/// Eve's unconditional and conditional entropies built from the global
/// entanglement-based state of the entangling-cloner attack.
///
/// Modes: 0 Alice's reference, 1 signal/Bob, 2 Eve's injected arm, 3 Eve's
/// kept arm, 4 detector vacuum, 5 heterodyne vacuum at Bob, 6 heterodyne
/// vacuum at Alice.
pub fn eve_entropies(
    tau: f64,
    omega: f64,
    v: f64,
    eta_d: f64,
    u_el: f64,
    detection: Detection,
    direction: Direction,
) -> (f64, f64) {
    let mut g = DMatrix::<f64>::identity(14, 14);
    tmsv_into(&mut g, 0, 1, v + 1.0);
    tmsv_into(&mut g, 2, 3, omega);
    let g = beamsplitter(&g, 1, 2, tau);
    let eve = [4, 5, 6, 7];
    let s_e = entropy_bits(&select(&g, &eve, &eve));
    let cond = match direction {
        Direction::Direct => {
            let g = beamsplitter(&g, 0, 6, 0.5);
            match detection {
                Detection::Homodyne => condition(&g, &eve, &[0], 0.0),
                Detection::Heterodyne => condition(&g, &eve, &[0, 13], 0.0),
            }
        }
        Direction::Reverse => {
            let g = beamsplitter(&g, 1, 4, eta_d);
            match detection {
                Detection::Homodyne => condition(&g, &eve, &[2], u_el),
                Detection::Heterodyne => {
                    let g = beamsplitter(&g, 1, 5, 0.5);
                    condition(&g, &eve, &[2, 11], u_el)
                }
            }
        }
    };
    (s_e, entropy_bits(&cond))
}

// ---------------------------------------------------------------- digitizer

/// Bin masses of N(0, 1) by composite Simpson integration of the density.
pub fn simpson_bin_probabilities(grid: &DigitizationGrid, panels: usize) -> Vec<f64> {
    let simpson = |a: f64, b: f64| {
        let h = (b - a) / panels as f64;
        let mut s = normal::pdf(a) + normal::pdf(b);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * normal::pdf(a + h * i as f64);
        }
        s * h / 3.0
    };
    grid.edges()
        .windows(2)
        .map(|e| simpson(e[0].max(-40.0), e[1].min(40.0)))
        .collect()
}

pub struct McEstimate {
    pub h_mean: f64,
    pub h_se: f64,
    pub v_mean: f64,
    pub v_se: f64,
}

/// Monte-Carlo H(k|y) and V(k|y): sample (x, y) with correlation ρ, digitize
/// x and average the conditional surprisal −log₂ p(k|y).
pub fn mc_conditional(grid: &DigitizationGrid, rho: f64, samples: usize, seed: u64) -> McEstimate {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let s = (1.0 - rho * rho).sqrt();
    let edges = grid.edges();
    let (mut m1, mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..samples {
        let y: f64 = rng.sample(StandardNormal);
        let z: f64 = rng.sample(StandardNormal);
        let x = rho * y + s * z;
        let k = digitize(x, grid).unwrap();
        let mean = rho * y;
        let p = normal::interval_mass((edges[k] - mean) / s, (edges[k + 1] - mean) / s);
        let info = -p.log2();
        m1 += info;
        m2 += info * info;
        m3 += info * info * info;
        m4 += info * info * info * info;
    }
    let n = samples as f64;
    let (m1, m2, m3, m4) = (m1 / n, m2 / n, m3 / n, m4 / n);
    let var = m2 - m1 * m1;
    let central4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1.powi(4);
    McEstimate {
        h_mean: m1,
        h_se: (var / n).sqrt(),
        v_mean: var,
        v_se: ((central4 - var * var).max(0.0) / n).sqrt(),
    }
}

// ---------------------------------------------------------------- GF(2^d)

/// Shift-and-add multiplication with explicit polynomial reduction.
pub fn gf_mul(a: u8, b: u8, d: u32) -> u8 {
    let poly = u32::from(PRIMITIVE_POLYNOMIALS[d as usize]);
    let (mut a, mut b, mut acc) = (u32::from(a), u32::from(b), 0u32);
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a & (1 << d) != 0 {
            a ^= poly;
        }
    }
    acc as u8
}

/// Dense H·k with the reference multiplier.
pub fn dense_syndrome(dense: &[Vec<u8>], key: &[u8], d: u32) -> Vec<u8> {
    dense
        .iter()
        .map(|row| row.iter().zip(key).fold(0u8, |acc, (&h, &k)| acc ^ gf_mul(h, k, d)))
        .collect()
}
