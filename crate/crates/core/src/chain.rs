//! First-principles evaluation of the probe measurement chain:
//! squeeze → Kerr SPM/XPM → anti-squeeze → lossy homodyne.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{
    apply_loss_quadrature, check_efficiency, homodyne_vector, spm_matrix, squeeze_matrix,
    GaussianMode, Mat2, Quad2, SqueezeOp,
};

/// Below this probe photon number the linearized SPM map is questionable.
pub const LINEARIZATION_WARN_NP: f64 = 100.0;

/// `|Hᵀ·S(R,φ)·(0,1)ᵀ|` below which the homodyne is treated as blind to the signal.
pub const ZERO_GAIN_THRESHOLD: f64 = 1e-14;

/// One measurement configuration. Angles in radians, squeeze factors in nepers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Mean probe photon number.
    pub n_p: f64,
    /// XPM factor Γ_X.
    pub gamma_x: f64,
    /// SPM factor Γ_S.
    pub gamma_s: f64,
    /// Probe detection efficiency.
    pub eta: f64,
    /// Input squeeze factor and angle.
    pub r: f64,
    pub theta: f64,
    /// Output anti-squeeze factor and angle.
    pub big_r: f64,
    pub phi: f64,
    /// Homodyne angle.
    pub zeta: f64,
}

impl ChainConfig {
    /// Normalized loss factor `ε = √((1−η)/η)`.
    pub fn epsilon(&self) -> f64 {
        ((1.0 - self.eta) / self.eta).sqrt()
    }

    pub fn input_squeeze(&self) -> SqueezeOp {
        SqueezeOp::new(self.r, self.theta)
    }

    pub fn anti_squeeze(&self) -> SqueezeOp {
        SqueezeOp::new(self.big_r, self.phi)
    }

    pub fn with_angles(mut self, theta: f64, phi: f64, zeta: f64) -> Self {
        self.theta = theta;
        self.phi = phi;
        self.zeta = zeta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("n_p", self.n_p),
            ("gamma_x", self.gamma_x),
            ("gamma_s", self.gamma_s),
            ("eta", self.eta),
            ("r", self.r),
            ("theta", self.theta),
            ("big_r", self.big_r),
            ("phi", self.phi),
            ("zeta", self.zeta),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::invalid(name, format!("must be finite, got {v}")));
            }
        }
        if self.n_p <= 0.0 {
            return Err(Error::invalid("n_p", format!("must be > 0, got {}", self.n_p)));
        }
        if self.gamma_x <= 0.0 {
            return Err(Error::invalid(
                "gamma_x",
                format!("must be > 0, got {}", self.gamma_x),
            ));
        }
        if self.gamma_s < 0.0 {
            return Err(Error::invalid(
                "gamma_s",
                format!("must be >= 0, got {}", self.gamma_s),
            ));
        }
        check_efficiency("eta", self.eta)?;
        if self.r < 0.0 {
            return Err(Error::invalid("r", format!("must be >= 0, got {}", self.r)));
        }
        if self.big_r < 0.0 {
            return Err(Error::invalid(
                "big_r",
                format!("must be >= 0, got {}", self.big_r),
            ));
        }
        if self.n_p < LINEARIZATION_WARN_NP {
            log::warn!(
                "n_p = {} is below {LINEARIZATION_WARN_NP}; the linearized probe model may be inaccurate",
                self.n_p
            );
        }
        Ok(())
    }

    /// Transfer matrix from the input quadratures to the anti-squeezer output.
    pub fn transfer_matrix(&self) -> Mat2 {
        squeeze_matrix(self.anti_squeeze()) * spm_matrix(self.n_p, self.gamma_s)
    }
}

/// Gain, noise and the resulting photon-number error of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainOutput {
    pub gain: f64,
    pub noise_variance: f64,
    pub delta_ns: f64,
}

/// `Hᵀ(ζ)·S(R,φ)·(0,1)ᵀ`: how much of the SPM-free sine quadrature reaches the detector.
pub fn signal_projection(cfg: &ChainConfig) -> f64 {
    let h = homodyne_vector(cfg.zeta);
    squeeze_matrix(cfg.anti_squeeze()).left_mul(h).s
}

/// Homodyne units per signal photon, `√(2ηN_p)·Γ_X·Hᵀ·S(R,φ)·(0,1)ᵀ`.
pub fn gain(cfg: &ChainConfig) -> f64 {
    (2.0 * cfg.eta * cfg.n_p).sqrt() * cfg.gamma_x * signal_projection(cfg)
}

/// Probe state after input squeezing, SPM and anti-squeezing.
pub fn output_mode(cfg: &ChainConfig) -> Result<GaussianMode> {
    GaussianMode::coherent(cfg.n_p)
        .propagate(squeeze_matrix(cfg.input_squeeze()))?
        .propagate(spm_matrix(cfg.n_p, cfg.gamma_s))?
        .propagate(squeeze_matrix(cfg.anti_squeeze()))
}

/// Variance of the signal-free homodyne output `d₀`.
///
/// The homodyne direction is pulled back through the chain,
/// `v = (S(R,φ)·F)ᵀ·H`, and contracted with the squeezed input covariance.
/// This is the same `Hᵀ·(M·cov·Mᵀ)·H` as forward propagation, bracketed so
/// that the large anti-squeezed entries never have to cancel.
pub fn noise_variance(cfg: &ChainConfig) -> Result<f64> {
    let input = GaussianMode::vacuum().propagate(squeeze_matrix(cfg.input_squeeze()))?;
    let v = measured_direction(cfg);
    apply_loss_quadrature(input.quadrature_variance(v), cfg.eta)
}

/// Same variance computed by propagating the full covariance forward and
/// projecting at the detector.
pub fn noise_variance_forward(cfg: &ChainConfig) -> Result<f64> {
    let out = output_mode(cfg)?;
    apply_loss_quadrature(out.quadrature_variance(homodyne_vector(cfg.zeta)), cfg.eta)
}

/// Input-quadrature direction `(B, A)` read out by the homodyne.
pub fn measured_direction(cfg: &ChainConfig) -> Quad2 {
    cfg.transfer_matrix().left_mul(homodyne_vector(cfg.zeta))
}

/// `ΔN_s = √Var(d₀)/|G|`.
pub fn measurement_error(cfg: &ChainConfig) -> Result<ChainOutput> {
    cfg.validate()?;
    if signal_projection(cfg).abs() <= ZERO_GAIN_THRESHOLD {
        return Err(Error::ZeroGain);
    }
    let g = gain(cfg);
    let noise = noise_variance(cfg)?;
    Ok(ChainOutput {
        gain: g,
        noise_variance: noise,
        delta_ns: noise.sqrt() / g.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn base() -> ChainConfig {
        ChainConfig {
            n_p: 1e6,
            gamma_x: 0.85e-5,
            gamma_s: 0.425e-5,
            eta: 0.9,
            r: 0.0,
            theta: 0.0,
            big_r: 0.0,
            phi: 0.0,
            zeta: FRAC_PI_2,
        }
    }

    #[test]
    fn gain_examples() {
        let cfg = base();
        assert_relative_eq!(gain(&cfg), 1.8e6f64.sqrt() * 0.85e-5, max_relative = 1e-14);
        assert_relative_eq!(gain(&cfg), 0.011404, max_relative = 1e-4);

        let amp = ChainConfig {
            big_r: 4.60517,
            phi: FRAC_PI_2,
            ..cfg
        };
        assert_relative_eq!(gain(&amp), 1.1404, max_relative = 1e-4);

        // homodyne orthogonal to the amplified quadrature only sees the e^{-R} part
        let phi = 0.3;
        let ortho = ChainConfig {
            big_r: 3.0,
            phi,
            zeta: phi + FRAC_PI_2,
            ..cfg
        };
        let expected = (-3.0f64).exp() * 1.8e6f64.sqrt() * 0.85e-5 * phi.cos();
        assert_relative_eq!(gain(&ortho), expected, max_relative = 1e-12);
    }

    #[test]
    fn gain_scales_with_sqrt_np() {
        let cfg = ChainConfig { big_r: 1.3, phi: 0.8, zeta: 1.1, ..base() };
        let doubled = ChainConfig { n_p: 2.0 * cfg.n_p, ..cfg };
        assert_relative_eq!(gain(&doubled) / gain(&cfg), 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn noise_examples() {
        let passive = ChainConfig { gamma_s: 0.0, theta: 0.4, phi: 1.0, zeta: 2.0, ..base() };
        assert_relative_eq!(noise_variance(&passive).unwrap(), 0.5, max_relative = 1e-14);

        // θ = 0 squeezes the sine quadrature, which is what ζ = π/2 reads at R = 0
        let squeezed = ChainConfig {
            gamma_s: 0.0,
            eta: 1.0,
            r: 0.5 * 10f64.ln(),
            theta: 0.0,
            ..base()
        };
        assert_relative_eq!(noise_variance(&squeezed).unwrap(), 0.05, max_relative = 1e-12);
    }

    #[test]
    fn forward_and_pullback_agree_on_generic_configs() {
        let cfg = ChainConfig {
            r: 0.7,
            theta: 0.3,
            big_r: 1.2,
            phi: 2.1,
            zeta: 0.4,
            ..base()
        };
        assert_relative_eq!(
            noise_variance(&cfg).unwrap(),
            noise_variance_forward(&cfg).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn measurement_error_examples() {
        let cfg = ChainConfig { gamma_s: 0.0, eta: 1.0, ..base() };
        let out = measurement_error(&cfg).unwrap();
        let expected = 1.0 / (0.85e-5 * 4e6f64.sqrt());
        assert_relative_eq!(out.delta_ns, expected, max_relative = 1e-12);
        assert_relative_eq!(out.delta_ns, 58.82, max_relative = 1e-4);
        assert_relative_eq!(out.delta_ns, out.noise_variance.sqrt() / out.gain.abs());
    }

    #[test]
    fn zero_gain_is_an_error() {
        let cfg = ChainConfig { zeta: 0.0, phi: 0.0, big_r: 0.0, ..base() };
        assert_eq!(measurement_error(&cfg), Err(Error::ZeroGain));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let cases = [
            ChainConfig { n_p: 0.0, ..base() },
            ChainConfig { gamma_x: 0.0, ..base() },
            ChainConfig { gamma_s: -1.0, ..base() },
            ChainConfig { eta: 0.0, ..base() },
            ChainConfig { eta: 1.5, ..base() },
            ChainConfig { r: -0.1, ..base() },
            ChainConfig { zeta: f64::NAN, ..base() },
        ];
        for cfg in cases {
            assert!(matches!(
                measurement_error(&cfg),
                Err(Error::InvalidParameter { .. })
            ));
        }
    }

    #[test]
    fn error_is_non_increasing_in_eta() {
        let mut prev = f64::INFINITY;
        for i in 1..=20 {
            let cfg = ChainConfig {
                eta: i as f64 / 20.0,
                r: 0.6,
                theta: 2.8,
                big_r: 1.5,
                phi: 2.9,
                zeta: 2.9,
                ..base()
            };
            let e = measurement_error(&cfg).unwrap().delta_ns;
            assert!(e <= prev * (1.0 + 1e-14), "eta {} gave {e} > {prev}", cfg.eta);
            prev = e;
        }
    }
}
