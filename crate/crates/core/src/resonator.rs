//! XPM/SPM factors of a Kerr microresonator and the loading-ratio check.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analytic::epsilon;
use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const C: f64 = 2.997_924_58e8;

const CAF2_PRESET: &str = include_str!("../presets/caf2.toml");

/// Microresonator parameters, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorSpec {
    pub q_load: f64,
    pub q_intr: f64,
    pub n0: f64,
    /// Kerr coefficient, m²/W.
    pub n2: f64,
    /// Vacuum wavelength, m.
    pub lambda0: f64,
    /// Effective mode volume, m³.
    pub v_eff: f64,
}

impl ResonatorSpec {
    /// The shipped CaF₂ preset. Its `v_eff` is back-solved to give `Γ_X ≈ 0.85e−5`.
    pub fn caf2() -> Self {
        Self::from_toml_str(CAF2_PRESET).expect("shipped preset parses")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Preset(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Preset(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("q_load", self.q_load),
            ("q_intr", self.q_intr),
            ("n0", self.n0),
            ("n2", self.n2),
            ("lambda0", self.lambda0),
            ("v_eff", self.v_eff),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if self.q_load > self.q_intr {
            log::warn!(
                "q_load = {:e} exceeds q_intr = {:e}; the resonator cannot be loaded that way",
                self.q_load,
                self.q_intr
            );
        }
        Ok(())
    }

    /// Carrier angular frequency `2πc/λ₀`, rad/s.
    pub fn omega0(&self) -> f64 {
        2.0 * PI * C / self.lambda0
    }
}

/// `(Γ_X, Γ_S)` with `Γ_X = 2Γ_S = 2·Q_load·(n₂/n₀)·ħω₀c/V_eff`.
pub fn gamma_factors(spec: &ResonatorSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    let gamma_x = 2.0 * spec.q_load * (spec.n2 / spec.n0) * HBAR * spec.omega0() * C / spec.v_eff;
    Ok((gamma_x, 0.5 * gamma_x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LoadingVerdict {
    /// `Q_load/Q_intr ≤ ε²/3`.
    Pass,
    /// `ε²/3 < Q_load/Q_intr ≤ ε²`.
    Marginal,
    Fail,
}

impl fmt::Display for LoadingVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LoadingVerdict::Pass => "PASS",
            LoadingVerdict::Marginal => "MARGINAL",
            LoadingVerdict::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoadingReport {
    pub ratio: f64,
    pub epsilon2: f64,
    pub verdict: LoadingVerdict,
}

/// Whether intracavity loss is negligible next to the detection loss:
/// `Q_load/Q_intr ≪ ε²`, read as a factor-of-3 margin.
pub fn loading_check(spec: &ResonatorSpec, eta: f64) -> Result<LoadingReport> {
    spec.validate()?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::invalid("eta", format!("must lie in (0, 1), got {eta}")));
    }
    let ratio = spec.q_load / spec.q_intr;
    let epsilon2 = epsilon(eta)?.powi(2);
    let verdict = if ratio <= epsilon2 / 3.0 {
        LoadingVerdict::Pass
    } else if ratio <= epsilon2 {
        LoadingVerdict::Marginal
    } else {
        LoadingVerdict::Fail
    };
    Ok(LoadingReport { ratio, epsilon2, verdict })
}
