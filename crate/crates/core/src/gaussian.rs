//! Single-mode Gaussian primitives in the quadrature picture.
//!
//! Quadratures are `a_c = (a + a†)/√2` and `a_s = (a − a†)/(i√2)`, so the
//! vacuum has covariance `I/2`. Every transformation in the measurement chain
//! is a real 2×2 matrix acting on the quadrature vector.

use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature variance of the vacuum.
pub const VACUUM_VARIANCE: f64 = 0.5;

/// Quadrature pair `(cosine, sine)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quad2 {
    pub c: f64,
    pub s: f64,
}

impl Quad2 {
    pub const fn new(c: f64, s: f64) -> Self {
        Self { c, s }
    }

    pub fn dot(self, other: Quad2) -> f64 {
        self.c * other.c + self.s * other.s
    }

    pub fn is_finite(self) -> bool {
        self.c.is_finite() && self.s.is_finite()
    }
}

/// Row-major real 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Self {
        Self { m11, m12, m21, m22 }
    }

    pub const fn diag(a: f64, b: f64) -> Self {
        Self::new(a, 0.0, 0.0, b)
    }

    pub fn scaled(self, k: f64) -> Self {
        Self::new(k * self.m11, k * self.m12, k * self.m21, k * self.m22)
    }

    pub fn transpose(self) -> Self {
        Self::new(self.m11, self.m21, self.m12, self.m22)
    }

    pub fn det(self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(self) -> f64 {
        self.m11 + self.m22
    }

    pub fn is_finite(self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m21.is_finite() && self.m22.is_finite()
    }

    /// Replaces the off-diagonal pair with its mean.
    pub fn symmetrized(self) -> Self {
        let off = 0.5 * (self.m12 + self.m21);
        Self::new(self.m11, off, off, self.m22)
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn symmetric_eigenvalues(self) -> (f64, f64) {
        let s = self.symmetrized();
        let mean = 0.5 * s.trace();
        let half_diff = 0.5 * (s.m11 - s.m22);
        let radius = half_diff.hypot(s.m12);
        (mean - radius, mean + radius)
    }

    /// `vᵀ·M·v`.
    pub fn quadratic_form(self, v: Quad2) -> f64 {
        v.c * (self.m11 * v.c + self.m12 * v.s) + v.s * (self.m21 * v.c + self.m22 * v.s)
    }

    /// Row vector `vᵀ·M`, returned as a column.
    pub fn left_mul(self, v: Quad2) -> Quad2 {
        Quad2::new(
            v.c * self.m11 + v.s * self.m21,
            v.c * self.m12 + v.s * self.m22,
        )
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.m11 * o.m11 + self.m12 * o.m21,
            self.m11 * o.m12 + self.m12 * o.m22,
            self.m21 * o.m11 + self.m22 * o.m21,
            self.m21 * o.m12 + self.m22 * o.m22,
        )
    }
}

impl Mul<Quad2> for Mat2 {
    type Output = Quad2;

    fn mul(self, v: Quad2) -> Quad2 {
        Quad2::new(
            self.m11 * v.c + self.m12 * v.s,
            self.m21 * v.c + self.m22 * v.s,
        )
    }
}

/// Mean quadratures and covariance of a single Gaussian mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMode {
    pub mean: Quad2,
    pub cov: Mat2,
}

impl GaussianMode {
    pub const fn vacuum() -> Self {
        Self {
            mean: Quad2::new(0.0, 0.0),
            cov: Mat2::diag(VACUUM_VARIANCE, VACUUM_VARIANCE),
        }
    }

    /// Coherent probe with real amplitude `α_p = √N_p`. The cosine-quadrature
    /// mean is `√2·α_p`, which follows from `a_c = (a + a†)/√2`.
    pub fn coherent(n_p: f64) -> Self {
        Self {
            mean: Quad2::new((2.0 * n_p).sqrt(), 0.0),
            ..Self::vacuum()
        }
    }

    /// Checks symmetry, positive semidefiniteness and the uncertainty bound
    /// `det(cov) ≥ 1/4`.
    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(Error::NonFinite("mode mean"));
        }
        if !self.cov.is_finite() {
            return Err(Error::NonFinite("mode covariance"));
        }
        let c = self.cov;
        if (c.m12 - c.m21).abs() > 1e-12 * c.m12.abs().max(1.0) {
            return Err(Error::invalid("cov", "covariance is not symmetric"));
        }
        let (lo, _) = c.symmetric_eigenvalues();
        if lo < -1e-12 {
            return Err(Error::invalid("cov", format!("negative eigenvalue {lo}")));
        }
        // relative slack: det of a strongly squeezed state is a difference of large products
        let scale = (c.m11 * c.m22).abs().max(c.m12 * c.m12).max(1.0);
        if c.det() < 0.25 - 1e-9 * scale {
            return Err(Error::invalid(
                "cov",
                format!("det {} violates the uncertainty bound 1/4", c.det()),
            ));
        }
        Ok(())
    }

    /// Linear map `mean → M·mean`, `cov → M·cov·Mᵀ`, symmetrized.
    pub fn propagate(&self, m: Mat2) -> Result<GaussianMode> {
        propagate(self, m)
    }

    pub fn quadrature_variance(&self, direction: Quad2) -> f64 {
        self.cov.quadratic_form(direction)
    }
}

/// Squeeze (or anti-squeeze) parameters: factor `r` in nepers and angle `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezeOp {
    pub r: f64,
    pub theta: f64,
}

impl SqueezeOp {
    pub const fn new(r: f64, theta: f64) -> Self {
        Self { r, theta }
    }

    pub fn matrix(self) -> Mat2 {
        squeeze_matrix(self)
    }
}

/// `S(r,θ) = [[cosh r + sinh r cos2θ, sinh r sin2θ], [sinh r sin2θ, cosh r − sinh r cos2θ]]`.
pub fn squeeze_matrix(op: SqueezeOp) -> Mat2 {
    let (ch, sh) = (op.r.cosh(), op.r.sinh());
    let (s2, c2) = (2.0 * op.theta).sin_cos();
    Mat2::new(ch + sh * c2, sh * s2, sh * s2, ch - sh * c2)
}

/// Linearized self-phase-modulation map `[[1, 0], [2·N_p·Γ_S, 1]]`.
pub fn spm_matrix(n_p: f64, gamma_s: f64) -> Mat2 {
    Mat2::new(1.0, 0.0, 2.0 * n_p * gamma_s, 1.0)
}

pub fn homodyne_vector(zeta: f64) -> Quad2 {
    let (s, c) = zeta.sin_cos();
    Quad2::new(c, s)
}

pub fn propagate(state: &GaussianMode, m: Mat2) -> Result<GaussianMode> {
    if !m.is_finite() {
        return Err(Error::NonFinite("transfer matrix"));
    }
    Ok(GaussianMode {
        mean: m * state.mean,
        cov: (m * state.cov * m.transpose()).symmetrized(),
    })
}

/// Beamsplitter loss on a single quadrature variance: `η·V + (1−η)/2`.
pub fn apply_loss_quadrature(variance: f64, eta: f64) -> Result<f64> {
    check_efficiency("eta", eta)?;
    if !(variance >= 0.0) {
        return Err(Error::invalid("variance", format!("must be >= 0, got {variance}")));
    }
    Ok(eta * variance + (1.0 - eta) * VACUUM_VARIANCE)
}

pub(crate) fn check_efficiency(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must lie in (0, 1], got {value}")))
    }
}

/// Power factor `10^(dB/10)`.
pub fn db_to_factor(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn factor_to_db(factor: f64) -> Result<f64> {
    if !(factor > 0.0) {
        return Err(Error::invalid("factor", format!("must be > 0, got {factor}")));
    }
    Ok(10.0 * factor.log10())
}

/// Squeeze factor `r` with `e^{2r} = 10^(dB/10)`.
pub fn db_to_squeeze(db: f64) -> f64 {
    0.5 * db_to_factor(db).ln()
}

pub fn squeeze_to_db(r: f64) -> f64 {
    10.0 * (2.0 * r).exp().log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn assert_mat(a: Mat2, b: Mat2, rel: f64) {
        assert_relative_eq!(a.m11, b.m11, max_relative = rel);
        assert_relative_eq!(a.m12, b.m12, max_relative = rel);
        assert_relative_eq!(a.m21, b.m21, max_relative = rel);
        assert_relative_eq!(a.m22, b.m22, max_relative = rel);
    }

    #[test]
    fn squeeze_matrix_examples() {
        assert_mat(squeeze_matrix(SqueezeOp::new(0.0, 1.3)), Mat2::IDENTITY, 0.0);
        let m = squeeze_matrix(SqueezeOp::new(1.15129, 0.0));
        assert_mat(m, Mat2::diag(3.16228, 0.31623), 1e-5);
        let m = squeeze_matrix(SqueezeOp::new(1.0, FRAC_PI_4));
        assert_mat(m, Mat2::new(1.54308, 1.17520, 1.17520, 1.54308), 1e-5);
    }

    #[test]
    fn spm_matrix_examples() {
        assert_eq!(spm_matrix(0.0, 0.7), Mat2::IDENTITY);
        assert_mat(spm_matrix(1e5, 0.425e-5), Mat2::new(1.0, 0.0, 0.85, 1.0), 1e-12);
        assert_mat(spm_matrix(3.92e5, 0.425e-5), Mat2::new(1.0, 0.0, 3.332, 1.0), 1e-12);
    }

    #[test]
    fn homodyne_vector_examples() {
        let h = homodyne_vector(0.0);
        assert_eq!((h.c, h.s), (1.0, 0.0));
        let h = homodyne_vector(FRAC_PI_2);
        assert_relative_eq!(h.c, 0.0, epsilon = 1e-16);
        assert_relative_eq!(h.s, 1.0);
        let h = homodyne_vector(FRAC_PI_4);
        assert_relative_eq!(h.c, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_relative_eq!(h.s, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn propagate_examples() {
        let vac = GaussianMode::vacuum();
        assert_eq!(vac.propagate(Mat2::IDENTITY).unwrap(), vac);

        let out = vac.propagate(spm_matrix(1e5, 0.425e-5)).unwrap();
        assert_mat(out.cov, Mat2::new(0.5, 0.425, 0.425, 0.86125), 1e-12);
        out.validate().unwrap();

        let bad = Mat2::new(f64::NAN, 0.0, 0.0, 1.0);
        assert_eq!(vac.propagate(bad), Err(Error::NonFinite("transfer matrix")));
    }

    #[test]
    fn loss_examples() {
        assert_relative_eq!(apply_loss_quadrature(0.5, 0.9).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(apply_loss_quadrature(5.0, 1.0).unwrap(), 5.0);
        assert_relative_eq!(apply_loss_quadrature(0.05, 0.9).unwrap(), 0.095, epsilon = 1e-15);
        assert!(apply_loss_quadrature(1.0, 0.0).is_err());
        assert!(apply_loss_quadrature(1.0, 1.1).is_err());
        assert!(apply_loss_quadrature(-1.0, 0.5).is_err());
    }

    #[test]
    fn db_examples() {
        assert_eq!(db_to_factor(0.0), 1.0);
        assert_eq!(db_to_squeeze(0.0), 0.0);
        assert_relative_eq!(db_to_factor(10.0), 10.0, max_relative = 1e-15);
        assert_relative_eq!(db_to_squeeze(10.0), 1.15129, epsilon = 1e-5);
        assert_relative_eq!(db_to_factor(40.0), 1e4, max_relative = 1e-15);
        assert_relative_eq!(db_to_squeeze(40.0), 4.60517, epsilon = 1e-5);
        assert_relative_eq!(factor_to_db(1e4).unwrap(), 40.0, max_relative = 1e-15);
        assert_relative_eq!(squeeze_to_db(db_to_squeeze(13.0)), 13.0, max_relative = 1e-14);
        assert!(factor_to_db(0.0).is_err());
        assert!(factor_to_db(-2.0).is_err());
    }

    #[test]
    fn mode_validation_rejects_unphysical_states() {
        let sub_vacuum = GaussianMode {
            mean: Quad2::new(0.0, 0.0),
            cov: Mat2::diag(0.1, 0.1),
        };
        assert!(sub_vacuum.validate().is_err());
        let asym = GaussianMode {
            mean: Quad2::new(0.0, 0.0),
            cov: Mat2::new(1.0, 0.1, 0.2, 1.0),
        };
        assert!(asym.validate().is_err());
        GaussianMode::coherent(1e6).validate().unwrap();
        assert_relative_eq!(GaussianMode::coherent(1e6).mean.c, 2e6f64.sqrt());
    }

    proptest! {
        #[test]
        fn squeeze_is_unimodular(r in 0.0..6.0f64, theta in 0.0..PI) {
            let d = squeeze_matrix(SqueezeOp::new(r, theta)).det();
            prop_assert!((d - 1.0).abs() <= 1e-10);
        }

        #[test]
        fn orthogonal_squeeze_inverts(r in 0.0..6.0f64, theta in 0.0..PI) {
            let p = squeeze_matrix(SqueezeOp::new(r, theta))
                * squeeze_matrix(SqueezeOp::new(r, theta + FRAC_PI_2));
            // entries scale like cosh²r; the tolerance is relative to that
            let scale = r.cosh().powi(2);
            prop_assert!((p.m11 - 1.0).abs() <= 1e-10 * scale);
            prop_assert!(p.m12.abs() <= 1e-10 * scale);
            prop_assert!(p.m21.abs() <= 1e-10 * scale);
            prop_assert!((p.m22 - 1.0).abs() <= 1e-10 * scale);
        }

        #[test]
        fn spm_is_unimodular(n_p in 0.0..1e9f64, g in 0.0..1e-4f64) {
            prop_assert_eq!(spm_matrix(n_p, g).det(), 1.0);
        }

        #[test]
        fn propagate_preserves_det(
            r1 in 0.0..3.0f64, t1 in 0.0..PI,
            k in 0.0..5.0f64,
            r2 in 0.0..3.0f64, t2 in 0.0..PI,
        ) {
            let vac = GaussianMode::vacuum();
            let s1 = vac.propagate(squeeze_matrix(SqueezeOp::new(r1, t1))).unwrap();
            let s2 = s1.propagate(Mat2::new(1.0, 0.0, k, 1.0)).unwrap();
            let s3 = s2.propagate(squeeze_matrix(SqueezeOp::new(r2, t2))).unwrap();
            for s in [s1, s2, s3] {
                // det is a difference of products of size ~ cov entries squared
                let scale = (s.cov.m11 * s.cov.m22).max(1.0);
                prop_assert!((s.cov.det() - 0.25).abs() <= 1e-9 * 0.25 * scale);
                prop_assert!(s.validate().is_ok());
            }
        }

        #[test]
        fn squeezed_vacuum_matches_closed_forms(r in 0.0..3.0f64, theta in 0.0..PI) {
            let s = GaussianMode::vacuum()
                .propagate(squeeze_matrix(SqueezeOp::new(r, theta)))
                .unwrap();
            let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
            let c2 = (2.0 * theta).cos();
            let s2 = (2.0 * theta).sin();
            let vc = 0.5 * (ch + sh * c2);
            let vs = 0.5 * (ch - sh * c2);
            let cv = 0.5 * sh * s2;
            prop_assert!((s.cov.m11 - vc).abs() <= 1e-10 * vc.abs());
            prop_assert!((s.cov.m22 - vs).abs() <= 1e-10 * vc.abs().max(vs.abs()));
            prop_assert!((s.cov.m12 - cv).abs() <= 1e-10 * ch);
        }

        #[test]
        fn loss_is_monotone_and_keeps_vacuum_floor(
            v1 in 0.5..1e6f64, dv in 0.0..1e3f64, eta in 0.01..=1.0f64
        ) {
            let a = apply_loss_quadrature(v1, eta).unwrap();
            let b = apply_loss_quadrature(v1 + dv, eta).unwrap();
            prop_assert!(b >= a);
            prop_assert!(a >= 0.5 - 1e-15);
        }
    }
}
