//! Closed-form sensitivity results.
//!
//! All squared errors are in photons². `r` and `big_r` are the input squeeze
//! and output anti-squeeze factors in nepers; `eta` is the probe detection
//! efficiency and must lie in `(0, 1]` (functions taking it raw assume so).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::chain::ChainConfig;
use crate::error::{Error, Result};
use crate::gaussian::check_efficiency;

/// Standard quantum limit `ΔN = √N`.
pub fn sql(n: f64) -> f64 {
    n.sqrt()
}

/// Normalized loss factor `ε = √((1−η)/η)`.
pub fn epsilon(eta: f64) -> Result<f64> {
    check_efficiency("eta", eta)?;
    Ok(eps(eta))
}

fn eps(eta: f64) -> f64 {
    ((1.0 - eta) / eta).sqrt()
}

/// Squared error of the coherent-probe scheme with the optimal readout quadrature.
pub fn dns2_coherent(n_p: f64, gamma_x: f64, gamma_s: f64, eta: f64) -> f64 {
    (1.0 / (4.0 * eta * n_p) + (1.0 - eta) * n_p * gamma_s * gamma_s) / (gamma_x * gamma_x)
}

/// Minimum of [`dns2_coherent`] over the probe photon number.
pub fn dns2_coherent_min(gamma_x: f64, gamma_s: f64, eta: f64) -> f64 {
    gamma_s / (gamma_x * gamma_x) * eps(eta)
}

/// Squared error with input squeezing `r`, output anti-squeezing `R` and
/// optimal squeeze and homodyne angles.
pub fn dns2_squeezed(n_p: f64, gamma_x: f64, gamma_s: f64, eta: f64, r: f64, big_r: f64) -> f64 {
    let e2 = eps(eta).powi(2);
    let shot = ((-2.0 * r).exp() + e2 * (-2.0 * big_r).exp()) / (4.0 * n_p);
    let spm = n_p * gamma_s * gamma_s * e2 / ((2.0 * big_r).exp() + e2 * (2.0 * r).exp());
    (shot + spm) / (gamma_x * gamma_x)
}

fn require_finite_optimum(gamma_s: f64, eta: f64) -> Result<()> {
    check_efficiency("eta", eta)?;
    if gamma_s <= 0.0 {
        return Err(Error::NoFiniteOptimum(
            "without SPM (gamma_s = 0) the error falls monotonically with n_p".into(),
        ));
    }
    if eta >= 1.0 {
        return Err(Error::NoFiniteOptimum(
            "with lossless detection (eta = 1) the error falls monotonically with n_p".into(),
        ));
    }
    Ok(())
}

/// Probe photon number minimizing [`dns2_squeezed`].
pub fn np_opt(gamma_s: f64, eta: f64, r: f64, big_r: f64) -> Result<f64> {
    require_finite_optimum(gamma_s, eta)?;
    let e = eps(eta);
    Ok(((big_r - r).exp() + e * e * (r - big_r).exp()) / (2.0 * gamma_s * e))
}

/// [`dns2_squeezed`] at [`np_opt`]: `(Γ_S/Γ_X²)·ε·e^{−r−R}`.
pub fn dns2_squeezed_min(gamma_x: f64, gamma_s: f64, eta: f64, r: f64, big_r: f64) -> Result<f64> {
    require_finite_optimum(gamma_s, eta)?;
    Ok(gamma_s / (gamma_x * gamma_x) * eps(eta) * (-r - big_r).exp())
}

/// `Hᵀ(ζ)·S(R,φ) = (C, S)` and the readout weights `A = S`, `B = C + 2N_pΓ_S·S`
/// of the sine and cosine input quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutWeights {
    pub c_term: f64,
    pub s_term: f64,
    pub a_term: f64,
    pub b_term: f64,
}

pub fn readout_weights(
    big_r: f64,
    phi: f64,
    zeta: f64,
    n_p: f64,
    gamma_s: f64,
) -> ReadoutWeights {
    let (up, down) = (big_r.exp(), (-big_r).exp());
    let (sd, cd) = (zeta - phi).sin_cos();
    let (sp, cp) = phi.sin_cos();
    let c_term = up * cd * cp - down * sd * sp;
    let s_term = up * cd * sp + down * sd * cp;
    ReadoutWeights {
        c_term,
        s_term,
        a_term: s_term,
        b_term: c_term + 2.0 * n_p * gamma_s * s_term,
    }
}

/// Homodyne noise variance of `d₀` written out in terms of `A`, `B`:
/// `(η/2)·{(A²+B²)cosh2r + [(B²−A²)cos2θ + 2AB·sin2θ]·sinh2r + ε²}`.
pub fn noise_variance_closed_form(cfg: &ChainConfig) -> f64 {
    let ab = readout_weights(cfg.big_r, cfg.phi, cfg.zeta, cfg.n_p, cfg.gamma_s);
    let (a, b) = (ab.a_term, ab.b_term);
    let (s2, c2) = (2.0 * cfg.theta).sin_cos();
    let (ch, sh) = ((2.0 * cfg.r).cosh(), (2.0 * cfg.r).sinh());
    let e2 = eps(cfg.eta).powi(2);
    0.5 * cfg.eta * ((a * a + b * b) * ch + ((b * b - a * a) * c2 + 2.0 * a * b * s2) * sh + e2)
}

/// Input squeeze angle in `[0, π)` minimizing the noise for readout weights `(A, B)`.
pub fn optimal_theta(a_term: f64, b_term: f64) -> Result<f64> {
    if a_term == 0.0 && b_term == 0.0 {
        return Err(Error::DegenerateDirection);
    }
    let two_theta = (-2.0 * a_term * b_term).atan2(a_term * a_term - b_term * b_term);
    let theta = (0.5 * two_theta).rem_euclid(PI);
    Ok(if theta >= PI { 0.0 } else { theta })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalAngles {
    pub theta_opt: f64,
    pub phi_opt: f64,
    pub zeta_opt: f64,
}

/// `cot φ` of the optimal anti-squeeze angle with `ζ = φ`.
pub fn optimal_cot_phi(n_p: f64, gamma_s: f64, eta: f64, r: f64, big_r: f64) -> f64 {
    -2.0 * n_p * gamma_s / (1.0 + eps(eta).powi(2) * (2.0 * r - 2.0 * big_r).exp())
}

/// Optimal angles: `ζ = φ`, `φ ∈ (0, π)` from [`optimal_cot_phi`], `θ` from
/// [`optimal_theta`] at the resulting readout weights.
pub fn optimal_phi(n_p: f64, gamma_s: f64, eta: f64, r: f64, big_r: f64) -> OptimalAngles {
    let cot = optimal_cot_phi(n_p, gamma_s, eta, r, big_r);
    let phi = 1f64.atan2(cot);
    let ab = readout_weights(big_r, phi, phi, n_p, gamma_s);
    // S = e^R sin φ > 0 on (0, π), so A and B never vanish together
    let theta = optimal_theta(ab.a_term, ab.b_term).expect("A = e^R sin(phi) > 0");
    OptimalAngles {
        theta_opt: theta,
        phi_opt: phi,
        zeta_opt: phi,
    }
}

/// `cfg` with its angles replaced by [`optimal_phi`].
pub fn with_optimal_angles(cfg: &ChainConfig) -> ChainConfig {
    let a = optimal_phi(cfg.n_p, cfg.gamma_s, cfg.eta, cfg.r, cfg.big_r);
    cfg.with_angles(a.theta_opt, a.phi_opt, a.zeta_opt)
}
