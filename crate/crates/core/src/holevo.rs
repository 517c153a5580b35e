//! Gaussian-state entropies and Eve's Holevo information.
//!
//! Quadratures are ordered (q₁, p₁, q₂, p₂, …). Eve holds the two output
//! modes of the entangling cloner: E′ (the beamsplitter output, variance φ)
//! and E″ (the kept arm of her two-mode squeezed vacuum, variance ω).

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::protocol::{ChannelParams, DetectorModel, Detection, Direction, ProtocolConfig};

/// Symplectic eigenvalues this far below 1 are clipped to 1.
pub const PHYSICAL_TOL: f64 = 1e-9;
const G_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    m: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 || !m.nrows().is_multiple_of(2) {
            return Err(domain(format!(
                "covariance matrix must be 2m×2m, got {}×{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(domain(format!("covariance matrix is not symmetric (|V − Vᵀ| = {asym:e})")));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(domain("covariance matrix has non-finite entries"));
        }
        Ok(Self { m })
    }

    pub fn from_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::LengthMismatch { expected: dim * dim, got: entries.len() });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn vacuum(modes: usize) -> Self {
        Self { m: DMatrix::identity(2 * modes, 2 * modes) }
    }

    pub fn thermal(omega: f64) -> Self {
        Self { m: DMatrix::identity(2, 2) * omega }
    }

    /// Two-mode squeezed vacuum [[ωI, √(ω²−1)Z], [√(ω²−1)Z, ωI]].
    pub fn tmsv(omega: f64) -> Self {
        let c = (omega * omega - 1.0).max(0.0).sqrt();
        Self { m: two_mode(omega, omega, omega, omega, c, -c) }
    }

    pub fn modes(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(self)
    }

    pub fn entropy(&self) -> Result<f64> {
        gaussian_entropy(self)
    }
}

/// [[diag(a_q, a_p), diag(c_q, c_p)], [diag(c_q, c_p), diag(b_q, b_p)]].
fn two_mode(a_q: f64, a_p: f64, b_q: f64, b_p: f64, c_q: f64, c_p: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            a_q, 0.0, c_q, 0.0, //
            0.0, a_p, 0.0, c_p, //
            c_q, 0.0, b_q, 0.0, //
            0.0, c_p, 0.0, b_p,
        ],
    )
}

/// Bosonic entropy g(ν) in bits.
pub fn g_entropy(nu: f64) -> Result<f64> {
    if nu.is_nan() || nu < 1.0 - G_TOL {
        return Err(Error::Unphysical(format!("symplectic eigenvalue {nu} < 1")));
    }
    let nu = nu.max(1.0);
    let plus = 0.5 * (nu + 1.0);
    let minus = 0.5 * (nu - 1.0);
    let tail = if minus > 0.0 { minus * minus.log2() } else { 0.0 };
    Ok(plus * plus.log2() - tail)
}

fn det2(m: &DMatrix<f64>, r: usize, c: usize) -> f64 {
    m[(r, c)] * m[(r + 1, c + 1)] - m[(r, c + 1)] * m[(r + 1, c)]
}

/// Closed form for two modes: ν±² = (Δ ± √(Δ² − 4 det V))/2 with
/// Δ = det A + det B + 2 det C.
pub fn symplectic_eigenvalues_two_mode(cm: &CovarianceMatrix) -> Result<[f64; 2]> {
    if cm.modes() != 2 {
        return Err(domain(format!("expected a two-mode matrix, got {} modes", cm.modes())));
    }
    let m = &cm.m;
    let delta = det2(m, 0, 0) + det2(m, 2, 2) + 2.0 * det2(m, 0, 2);
    let det = m.determinant();
    let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
    let hi = (0.5 * (delta + disc)).max(0.0).sqrt();
    // The smaller root via det/hi² avoids cancellation near purity.
    let lo_sq = if delta + disc > 0.0 { 2.0 * det / (delta + disc) } else { 0.0 };
    Ok([lo_sq.max(0.0).sqrt(), hi])
}

/// General m: the spectrum of −V^{1/2}ΩVΩV^{1/2} is {ν_i²}, each twice.
pub fn symplectic_eigenvalues_general(cm: &CovarianceMatrix) -> Result<Vec<f64>> {
    let dim = cm.m.nrows();
    let eig = SymmetricEigen::new(cm.m.clone());
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::Unphysical("covariance matrix is not positive definite".into()));
    }
    let sqrt_v = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let omega = symplectic_form(dim / 2);
    let mut k = -(&sqrt_v * &omega * &cm.m * &omega * &sqrt_v);
    k = 0.5 * (&k + k.transpose());
    let mut nu_sq: Vec<f64> = SymmetricEigen::new(k).eigenvalues.iter().copied().collect();
    nu_sq.sort_by(f64::total_cmp);
    Ok(nu_sq
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect())
}

pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for i in 0..modes {
        omega[(2 * i, 2 * i + 1)] = 1.0;
        omega[(2 * i + 1, 2 * i)] = -1.0;
    }
    omega
}

/// Sorted symplectic spectrum.
pub fn symplectic_eigenvalues(cm: &CovarianceMatrix) -> Result<Vec<f64>> {
    match cm.modes() {
        1 => {
            let det = cm.m.determinant();
            if det <= 0.0 {
                return Err(Error::Unphysical("single-mode determinant is not positive".into()));
            }
            Ok(vec![det.sqrt()])
        }
        // The two-mode closed form loses ~√ε·ω near a degenerate (pure)
        // spectrum, so it is kept only as a cross-check.
        _ => symplectic_eigenvalues_general(cm),
    }
}

pub fn is_physical(cm: &CovarianceMatrix) -> bool {
    symplectic_eigenvalues(cm).is_ok_and(|nu| nu.iter().all(|&v| v >= 1.0 - PHYSICAL_TOL))
        && SymmetricEigen::new(cm.m.clone()).eigenvalues.iter().all(|&l| l > 0.0)
}

/// von Neumann entropy Σ g(ν_i) in bits.
pub fn gaussian_entropy(cm: &CovarianceMatrix) -> Result<f64> {
    let nus = symplectic_eigenvalues(cm)?;
    nus.iter().try_fold(0.0, |acc, &nu| {
        if nu < 1.0 - PHYSICAL_TOL {
            return Err(Error::Unphysical(format!("symplectic eigenvalue {nu} < 1")));
        }
        Ok(acc + g_entropy(nu)?)
    })
}

fn checked(m: DMatrix<f64>) -> Result<CovarianceMatrix> {
    let cm = CovarianceMatrix::new(m)?;
    let nus = symplectic_eigenvalues(&cm)?;
    if let Some(nu) = nus.iter().find(|&&nu| nu < 1.0 - PHYSICAL_TOL) {
        return Err(Error::Unphysical(format!("symplectic eigenvalue {nu} < 1")));
    }
    Ok(cm)
}

fn check_channel(tau: f64, omega: f64, v: f64) -> Result<()> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(domain(format!("transmissivity {tau} must lie in (0, 1]")));
    }
    if !(omega >= 1.0 && omega.is_finite()) {
        return Err(domain(format!("Eve's variance ω = {omega} must be at least 1")));
    }
    if !(v >= 0.0 && v.is_finite()) {
        return Err(domain(format!("modulation variance {v} must be non-negative")));
    }
    Ok(())
}

/// Appendix-style parameters: φ₀ = τω + (1 − τ), φ = τω + (1 − τ)(V + 1),
/// ψ = √(τ(ω² − 1)).
pub fn cloner_terms(tau: f64, omega: f64, v: f64) -> (f64, f64, f64) {
    let phi0 = tau * omega + (1.0 - tau);
    let phi = tau * omega + (1.0 - tau) * (v + 1.0);
    let psi = (tau * (omega * omega - 1.0)).max(0.0).sqrt();
    (phi0, phi, psi)
}

/// Eve's unconditional state [[φI, ψZ], [ψZ, ωI]].
pub fn eve_total_cm(tau: f64, omega: f64, v: f64) -> Result<CovarianceMatrix> {
    check_channel(tau, omega, v)?;
    let (_, phi, psi) = cloner_terms(tau, omega, v);
    checked(two_mode(phi, phi, omega, omega, psi, -psi))
}

/// Eve's state conditioned on Alice's modulation (direct reconciliation).
pub fn conditional_cm_dr(tau: f64, omega: f64, v: f64, detection: Detection) -> Result<CovarianceMatrix> {
    check_channel(tau, omega, v)?;
    let (phi0, phi, psi) = cloner_terms(tau, omega, v);
    let p_var = match detection {
        Detection::Homodyne => phi,
        Detection::Heterodyne => phi0,
    };
    checked(two_mode(phi0, p_var, omega, omega, psi, -psi))
}

/// Eve's modes jointly with Bob's detected mode B′.
///
/// Returns Eve's 4×4 block, the q-quadrature cross column (Cov(E, B′_q)) and
/// Var B′. The p column is the q column with the E″ entry negated.
struct EveBob {
    eve: DMatrix<f64>,
    cross_q: [f64; 4],
    bob_var: f64,
}

fn eve_bob(
    tau: f64,
    omega: f64,
    v: f64,
    eta_d: f64,
    detector_noise: f64,
) -> Result<EveBob> {
    let mu = v + 1.0;
    let eve = eve_total_cm(tau, omega, v)?.m;
    let bob = tau * mu + (1.0 - tau) * omega;
    let gamma = (eta_d * tau * (1.0 - tau)).sqrt() * (omega - mu);
    let delta = (eta_d * (1.0 - tau) * (omega * omega - 1.0)).max(0.0).sqrt();
    Ok(EveBob {
        eve,
        cross_q: [gamma, 0.0, delta, 0.0],
        bob_var: eta_d * bob + 1.0 - eta_d + detector_noise,
    })
}

/// Eve's state conditioned on Bob's outcome (reverse reconciliation).
///
/// Bob's detector is a beamsplitter of efficiency η_d followed by additive
/// electronic noise (h·u_el for heterodyne, which runs two detectors).
pub fn conditional_cm_rr(
    tau: f64,
    omega: f64,
    v: f64,
    eta_d: f64,
    u_el: f64,
    detection: Detection,
) -> Result<CovarianceMatrix> {
    check_channel(tau, omega, v)?;
    if !(eta_d > 0.0 && eta_d <= 1.0) || !(u_el >= 0.0) {
        return Err(domain(format!("detector (η_d = {eta_d}, u_el = {u_el}) is invalid")));
    }
    let noise = detection.hf() * u_el;
    let EveBob { mut eve, cross_q, bob_var } = eve_bob(tau, omega, v, eta_d, noise)?;
    let cross_p = [cross_q[1], cross_q[0], cross_q[3], -cross_q[2]];
    let denom = match detection {
        Detection::Homodyne => bob_var,
        Detection::Heterodyne => bob_var + 1.0,
    };
    if !(denom > 0.0) {
        return Err(Error::Singular("Bob's conditioning block is singular".into()));
    }
    let mut subtract = |col: &[f64; 4]| {
        for i in 0..4 {
            for j in 0..4 {
                eve[(i, j)] -= col[i] * col[j] / denom;
            }
        }
    };
    subtract(&cross_q);
    if detection == Detection::Heterodyne {
        subtract(&cross_p);
    }
    checked(eve)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolevoResult {
    pub s_e: f64,
    pub s_e_cond: f64,
    pub chi: f64,
}

/// χ for an explicit (τ, ω, V).
pub fn holevo_from_omega(cfg: &ProtocolConfig, tau: f64, omega: f64, v: f64) -> Result<HolevoResult> {
    let total = eve_total_cm(tau, omega, v)?;
    let cond = match cfg.direction {
        Direction::Direct => conditional_cm_dr(tau, omega, v, cfg.detection)?,
        Direction::Reverse => {
            let (eta, u_el) = match cfg.detector_model {
                DetectorModel::Trusted => (cfg.eta_d, cfg.u_el),
                DetectorModel::Ideal => (1.0, 0.0),
            };
            conditional_cm_rr(tau, omega, v, eta, u_el, cfg.detection)?
        }
    };
    let s_e = gaussian_entropy(&total)?;
    let s_e_cond = gaussian_entropy(&cond)?;
    let chi = s_e - s_e_cond;
    if chi < -PHYSICAL_TOL {
        return Err(Error::Unphysical(format!("negative Holevo information {chi}")));
    }
    Ok(HolevoResult { s_e, s_e_cond, chi: chi.max(0.0) })
}

/// Eve's Holevo information χ(x:E) or χ(y:E) in bits per channel use.
pub fn holevo_bound(cfg: &ProtocolConfig, ch: &ChannelParams) -> Result<HolevoResult> {
    holevo_from_omega(cfg, ch.tau, ch.omega()?, ch.v)
}
