//! Feasibility thresholds for non-Gaussian state preparation and
//! single-photon resolution.
//!
//! The underlying criteria hold only up to factors of order unity. The
//! constants here (8/27, 4/27) are the exact algebra of the stated
//! inequalities; comparisons against them are order-of-magnitude.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::check_efficiency;

/// Points in the tabulated margin curve.
pub const MARGIN_TABLE_POINTS: usize = 41;

/// Largest photon-number uncertainty of a non-Gaussian state with mean `n`: `n^{1/3}`.
pub fn non_gaussian_bound(n: f64) -> Result<f64> {
    if !(n >= 0.0) || !n.is_finite() {
        return Err(Error::invalid("n", format!("must be finite and >= 0, got {n}")));
    }
    Ok(n.cbrt())
}

/// Admissible `ΔN²_meas` at signal photon number `n_s`: `n_s^{2/3} − (1−μ)·n_s`.
pub fn margin(n_s: f64, mu: f64) -> Result<f64> {
    check_efficiency("mu", mu)?;
    if !(n_s >= 0.0) || !n_s.is_finite() {
        return Err(Error::invalid("n_s", format!("must be finite and >= 0, got {n_s}")));
    }
    Ok(n_s.powf(2.0 / 3.0) - (1.0 - mu) * n_s)
}

fn check_lossy(mu: f64) -> Result<()> {
    check_efficiency("mu", mu)?;
    if mu == 1.0 {
        return Err(Error::invalid("mu", "the margin is unbounded without signal loss"));
    }
    Ok(())
}

/// Maximizer of [`margin`]: `8/(27(1−μ)³)`.
pub fn ns_star(mu: f64) -> Result<f64> {
    check_lossy(mu)?;
    Ok(8.0 / (27.0 * (1.0 - mu).powi(3)))
}

/// `margin(ns_star(μ), μ) = 4/(27(1−μ)²)`.
pub fn margin_max(mu: f64) -> Result<f64> {
    check_lossy(mu)?;
    Ok(4.0 / (27.0 * (1.0 - mu).powi(2)))
}

/// Largest admissible measurement error, `√margin_max = 2/(3√3·(1−μ))`.
pub fn dns_max(mu: f64) -> Result<f64> {
    Ok(margin_max(mu)?.sqrt())
}

/// Largest `N_s` whose loss-induced photon-number variance `μ(1−μ)·N_s`
/// stays within one photon², so a measurement with `ΔN_meas ≲ 1` still
/// resolves single quanta after the signal loss.
pub fn single_photon_ns(mu: f64) -> Result<f64> {
    check_lossy(mu)?;
    Ok(1.0 / (mu * (1.0 - mu)))
}

/// Smallest `n_s` with `margin(n_s, μ) ≥ target`, by bisection below the
/// maximizer. `None` when even the maximum falls short.
pub fn min_ns_for_margin(mu: f64, target: f64) -> Result<Option<f64>> {
    check_efficiency("mu", mu)?;
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::invalid("target", format!("must be finite and > 0, got {target}")));
    }
    // below the maximizer the margin is increasing
    let mut hi = if mu < 1.0 { ns_star(mu)? } else { target.powf(1.5) };
    if margin(hi, mu)? < target {
        return Ok(None);
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = margin(mid, mu)? - target;
        if f.abs() < 1e-9 || mid == lo || mid == hi {
            return Ok(Some(mid));
        }
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub mu: f64,
    pub dns_meas: f64,
    pub ns_star: f64,
    pub margin_max: f64,
    pub dns_max: f64,
    /// `ΔN_meas ≤ 1`.
    pub single_photon_feasible: bool,
    /// `ΔN²_meas ≤ margin_max`.
    pub non_gaussian_feasible: bool,
    /// See [`single_photon_ns`].
    pub single_photon_ns: f64,
    /// Smallest `n_s` with `margin ≥ 1`.
    pub min_ns_margin: Option<f64>,
    /// `(n_s, margin)` on a log grid from 1 to `100·ns_star`.
    pub margin_table: Vec<(f64, f64)>,
    /// All values above hold up to factors of order unity.
    pub order_of_magnitude: bool,
}

/// Non-Gaussian and single-photon verdicts for measurement error `dns_meas`
/// and signal efficiency `mu < 1`.
pub fn single_photon_check(dns_meas: f64, mu: f64) -> Result<ThresholdReport> {
    if !(dns_meas >= 0.0) || !dns_meas.is_finite() {
        return Err(Error::invalid(
            "dns_meas",
            format!("must be finite and >= 0, got {dns_meas}"),
        ));
    }
    let star = ns_star(mu)?;
    let m_max = margin_max(mu)?;
    let top = (100.0 * star).max(10.0);
    let margin_table = (0..MARGIN_TABLE_POINTS)
        .map(|i| {
            let n = top.powf(i as f64 / (MARGIN_TABLE_POINTS - 1) as f64);
            margin(n, mu).map(|m| (n, m))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThresholdReport {
        mu,
        dns_meas,
        ns_star: star,
        margin_max: m_max,
        dns_max: m_max.sqrt(),
        single_photon_feasible: dns_meas <= 1.0,
        non_gaussian_feasible: dns_meas * dns_meas <= m_max,
        single_photon_ns: single_photon_ns(mu)?,
        min_ns_margin: min_ns_for_margin(mu, 1.0)?,
        margin_table,
        order_of_magnitude: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bound_examples() {
        assert_eq!(non_gaussian_bound(0.0).unwrap(), 0.0);
        assert_relative_eq!(non_gaussian_bound(1000.0).unwrap(), 10.0, max_relative = 1e-15);
        assert_relative_eq!(non_gaussian_bound(1e6).unwrap(), 100.0, max_relative = 1e-15);
        assert!(non_gaussian_bound(-1.0).is_err());
    }

    #[test]
    fn margin_examples() {
        assert_relative_eq!(margin(1e6, 1.0).unwrap(), 1e4, max_relative = 1e-12);
        assert!(margin(1e6, 0.99).unwrap().abs() < 1e-8);
        let star = ns_star(0.9).unwrap();
        assert_relative_eq!(margin(star, 0.9).unwrap(), 14.8148148148, max_relative = 1e-9);
    }

    #[test]
    fn star_examples() {
        assert_relative_eq!(ns_star(0.9).unwrap(), 296.296296296, max_relative = 1e-9);
        assert_relative_eq!(ns_star(0.99).unwrap(), 2.963e5, max_relative = 1e-3);
        assert_relative_eq!(dns_max(0.9).unwrap(), 0.3849 / 0.1, max_relative = 1e-4);
        assert!(ns_star(1.0).is_err());
    }

    #[test]
    fn check_examples() {
        let rep = single_photon_check(1.0, 0.9).unwrap();
        assert!(rep.single_photon_feasible && rep.non_gaussian_feasible);
        assert_relative_eq!(rep.single_photon_ns, 1.0 / 0.09, max_relative = 1e-14);
        let n = rep.min_ns_margin.unwrap();
        assert!((margin(n, 0.9).unwrap() - 1.0).abs() < 1e-9);

        let rep = single_photon_check(7.88, 0.99).unwrap();
        assert!(rep.non_gaussian_feasible && !rep.single_photon_feasible);
        assert_relative_eq!(rep.margin_max, 1481.48, max_relative = 1e-5);

        assert!(!single_photon_check(140.0, 0.9).unwrap().non_gaussian_feasible);
    }

    #[test]
    fn margin_table_peaks_at_star() {
        let rep = single_photon_check(3.0, 0.95).unwrap();
        assert_eq!(rep.margin_table.len(), MARGIN_TABLE_POINTS);
        for &(_, m) in &rep.margin_table {
            assert!(m <= rep.margin_max * (1.0 + 1e-12));
        }
    }

    #[test]
    fn lossless_margin_threshold_is_one_photon() {
        assert_relative_eq!(min_ns_for_margin(1.0, 1.0).unwrap().unwrap(), 1.0, epsilon = 1e-9);
        assert_eq!(min_ns_for_margin(0.2, 1.0).unwrap(), None);
    }
}
