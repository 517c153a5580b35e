//! Fast invariant checks runnable from the command line.

use crate::digitizer::{self, DigitizationGrid, DEFAULT_ALPHA};
use crate::holevo::{self, CovarianceMatrix};
use crate::keyrate::{asymptotic_rate_zeta, RateEngine};
use crate::ldpc::{self, GaloisField};
use crate::protocol::{ChannelParams, Detection, Direction, ProtocolConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn storage_golden() -> Result<String, String> {
    let dense = ldpc::dense_storage_bits(1e5, 4, 0.667) / ldpc::BITS_PER_GB;
    let sparse = ldpc::sparse_storage_bits(1e5, 4, 2.0, 0.667) / ldpc::BITS_PER_MB;
    ensure((dense / 3.34 - 1.0).abs() < 0.01, || format!("dense {dense} GB"))?;
    ensure((sparse / 0.67 - 1.0).abs() < 0.02, || format!("sparse {sparse} MB"))?;
    Ok(format!("dense {dense:.3} GB, sparse {sparse:.3} MB"))
}

fn design_rates() -> Result<String, String> {
    let want = [0.333, 0.5, 0.6, 0.666, 0.714, 0.75, 0.777, 0.8];
    for (d_c, w) in (3u32..=10).zip(want) {
        let r = ldpc::design_rate(2.0, f64::from(d_c)).map_err(|e| e.to_string())?;
        ensure((r * 1000.0).floor() / 1000.0 == w, || format!("d_c = {d_c}: {r}"))?;
    }
    Ok("d_c = 3..10".into())
}

fn gf_axioms() -> Result<String, String> {
    for d in 1..=4 {
        let f = GaloisField::new(d).map_err(|e| e.to_string())?;
        let q = f.order() as u8;
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    let lhs = f.mul(a, f.add(b, c));
                    let rhs = f.add(f.mul(a, b), f.mul(a, c));
                    ensure(lhs == rhs, || format!("d = {d}: {a}·({b}+{c})"))?;
                }
            }
        }
    }
    Ok("distributivity exhaustive for d ≤ 4".into())
}

fn ldpc_regular_round_trip() -> Result<String, String> {
    for seed in 0..10 {
        let code = ldpc::generate_regular_ldpc(600, 4, 2, 6, seed).map_err(|e| e.to_string())?;
        ensure(code.column_weights().iter().all(|&w| w == 2), || format!("seed {seed}: column weights"))?;
        ensure(code.row_weights().iter().all(|&w| w == 6), || format!("seed {seed}: row weights"))?;
        let bytes = ldpc::encode_crs(&code);
        let back = ldpc::decode_crs(&bytes).map_err(|e| e.to_string())?;
        ensure(back == code && ldpc::encode_crs(&back) == bytes, || format!("seed {seed}: CRS round trip"))?;
    }
    Ok("10 seeds".into())
}

fn syndrome_linearity() -> Result<String, String> {
    let code = ldpc::generate_regular_ldpc(120, 4, 2, 4, 3).map_err(|e| e.to_string())?;
    let f = GaloisField::new(4).map_err(|e| e.to_string())?;
    let mut rng = ldpc::CodeRng::new(11);
    for _ in 0..200 {
        let a: Vec<u8> = (0..120).map(|_| rng.below(16) as u8).collect();
        let b: Vec<u8> = (0..120).map(|_| rng.below(16) as u8).collect();
        let sum: Vec<u8> = a.iter().zip(&b).map(|(&x, &y)| f.add(x, y)).collect();
        let sa = ldpc::syndrome(&code, &f, &a).map_err(|e| e.to_string())?;
        let sb = ldpc::syndrome(&code, &f, &b).map_err(|e| e.to_string())?;
        let ss = ldpc::syndrome(&code, &f, &sum).map_err(|e| e.to_string())?;
        ensure(sa.iter().zip(&sb).zip(&ss).all(|((&x, &y), &z)| f.add(x, y) == z), || "syndrome not linear".into())?;
    }
    Ok("200 key pairs".into())
}

fn concatenation_entropy() -> Result<String, String> {
    for d in 1..=6 {
        let grid = DigitizationGrid::new(d, DEFAULT_ALPHA).map_err(|e| e.to_string())?;
        let p = digitizer::bin_probabilities(&grid);
        let joint: Vec<f64> = p.iter().flat_map(|a| p.iter().map(move |b| a * b)).collect();
        let (h1, h2) = (digitizer::entropy_of(&p), digitizer::entropy_of(&joint));
        ensure((h2 - 2.0 * h1).abs() < 1e-9, || format!("d = {d}: {h2} vs {}", 2.0 * h1))?;
    }
    Ok("d = 1..6".into())
}

fn gaussian_states() -> Result<String, String> {
    let nu = holevo::symplectic_eigenvalues(&CovarianceMatrix::tmsv(3.0)).map_err(|e| e.to_string())?;
    ensure(nu.iter().all(|v| (v - 1.0).abs() < 1e-10), || format!("TMSV eigenvalues {nu:?}"))?;
    let nu = holevo::symplectic_eigenvalues(&CovarianceMatrix::thermal(2.5)).map_err(|e| e.to_string())?;
    ensure((nu[0] - 2.5).abs() < 1e-10, || format!("thermal eigenvalue {nu:?}"))?;
    for dir in [Direction::Direct, Direction::Reverse] {
        let cfg = ProtocolConfig { direction: dir, ..Default::default() };
        let chi = holevo::holevo_bound(&cfg, &ChannelParams::new(1.0, 0.0, 10.0).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
            .chi;
        ensure(chi.abs() < 1e-9, || format!("{dir:?}: χ(τ = 1) = {chi}"))?;
    }
    Ok("vacuum, thermal, TMSV, χ(τ = 1)".into())
}

fn rate_forms_agree() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for det in [Detection::Homodyne, Detection::Heterodyne] {
        for dir in [Direction::Direct, Direction::Reverse] {
            let cfg = ProtocolConfig { detection: det, direction: dir, ..Default::default() };
            let e = RateEngine::at_loss(cfg, 0.4, 0.01).map_err(|e| e.to_string())?;
            let p = e.evaluate(200_000, 150_000, 8.0).map_err(|e| e.to_string())?;
            worst = worst.max((asymptotic_rate_zeta(p.zeta, p.i_gauss, p.chi) - p.r_infty_pe_ec).abs());
        }
    }
    ensure(worst < 1e-12, || format!("max difference {worst:e}"))?;
    Ok(format!("max difference {worst:.1e}"))
}

const CHECKS: [(&str, Check); 8] = [
    ("storage golden numbers", storage_golden),
    ("design rates", design_rates),
    ("GF(2^d) distributivity", gf_axioms),
    ("LDPC regularity and CRS round trip", ldpc_regular_round_trip),
    ("syndrome linearity", syndrome_linearity),
    ("concatenated symbol entropy", concatenation_entropy),
    ("Gaussian states", gaussian_states),
    ("explicit vs ζ rate forms", rate_forms_agree),
];

/// Runs every check; a panic inside a check counts as a failure.
pub fn run_selftest() -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .map(|&(name, check)| {
            let (passed, detail) = match std::panic::catch_unwind(check) {
                Ok(Ok(d)) => (true, d),
                Ok(Err(d)) => (false, d),
                Err(_) => (false, "panicked".into()),
            };
            CheckOutcome { name, passed, detail }
        })
        .collect()
}
