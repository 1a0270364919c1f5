//! Signal-mode loss: a beamsplitter of efficiency μ in front of the
//! measurement (input loss) or behind it (state preparation).
//!
//! Everything is second-moment algebra on the photon number.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::check_efficiency;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalLossConfig {
    /// Signal quantum efficiency.
    pub mu: f64,
    /// Mean photon number at the reference plane.
    pub n_s: f64,
    /// Incident photon-number variance; only used for input loss.
    pub var_in: f64,
}

impl SignalLossConfig {
    pub fn validate(&self) -> Result<()> {
        check_efficiency("mu", self.mu)?;
        non_negative("n_s", self.n_s)?;
        non_negative("var_in", self.var_in)
    }
}

fn non_negative(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite and >= 0, got {v}")))
    }
}

/// Mean and variance after binomial thinning with efficiency `mu`.
pub fn input_loss(n_s_in: f64, var_in: f64, mu: f64) -> Result<(f64, f64)> {
    check_efficiency("mu", mu)?;
    non_negative("n_s_in", n_s_in)?;
    non_negative("var_in", var_in)?;
    Ok((mu * n_s_in, mu * mu * var_in + mu * (1.0 - mu) * n_s_in))
}

/// Error on the incident photon number when `n_s` photons (after loss) are
/// measured with error `dns2_meas`: `[μ(1−μ)·n_s + ΔN²_meas]/μ²`.
pub fn measurement_error_with_input_loss(n_s: f64, dns2_meas: f64, mu: f64) -> Result<f64> {
    check_efficiency("mu", mu)?;
    non_negative("n_s", n_s)?;
    non_negative("dns2_meas", dns2_meas)?;
    Ok((mu * (1.0 - mu) * n_s + dns2_meas) / (mu * mu))
}

/// Same error normalized by `n_s`: `(1−μ)/μ + ΔN²_meas/(μ²·n_s)`.
/// Below one means sub-SQL, which needs `μ > 1/2`.
pub fn normalized_input_loss_error(n_s: f64, dns2_meas: f64, mu: f64) -> Result<f64> {
    if !(n_s > 0.0) {
        return Err(Error::invalid("n_s", format!("must be > 0, got {n_s}")));
    }
    Ok(measurement_error_with_input_loss(n_s, dns2_meas, mu)? / n_s)
}

/// Mean and variance of a state prepared by measuring `n_s` photons with
/// error `dns2_meas` and then losing a fraction `1−μ` on the way out.
pub fn prepared_state(n_s: f64, dns2_meas: f64, mu: f64) -> Result<(f64, f64)> {
    check_efficiency("mu", mu)?;
    non_negative("n_s", n_s)?;
    non_negative("dns2_meas", dns2_meas)?;
    Ok((mu * n_s, mu * mu * dns2_meas + mu * (1.0 - mu) * n_s))
}

/// Fano factor of the prepared state, `1 − μ(1 − ΔN²_meas/n_s)`.
pub fn prepared_fano(n_s: f64, dns2_meas: f64, mu: f64) -> Result<f64> {
    if !(n_s > 0.0) {
        return Err(Error::invalid("n_s", format!("must be > 0, got {n_s}")));
    }
    let (n, v) = prepared_state(n_s, dns2_meas, mu)?;
    Ok(v / n)
}

pub fn is_sub_poissonian(n_prep: f64, var_prep: f64) -> Result<bool> {
    if !(n_prep > 0.0) {
        return Err(Error::invalid("n_prep", format!("must be > 0, got {n_prep}")));
    }
    Ok(var_prep < n_prep)
}
