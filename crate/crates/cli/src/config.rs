//! JSON configuration files. dB values are converted to squeeze factors here
//! and nowhere else.

use std::path::Path;

use kerr_qnd::analytic::{np_opt, with_optimal_angles};
use kerr_qnd::gaussian::db_to_squeeze;
use kerr_qnd::ChainConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub const DEFAULT_GAMMA_X: f64 = 0.85e-5;
pub const DEFAULT_GAMMA_S: f64 = 0.425e-5;
pub const DEFAULT_ETA: f64 = 0.9;

/// How squeeze and homodyne angles are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AngleMode {
    /// Closed-form optimum.
    AnalyticOptimal,
    /// Derivative-free search over all three angles.
    NumericOptimal,
    /// The `theta`, `phi`, `zeta` given in the config.
    Fixed,
}

/// Probe chain parameters as written in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    /// Probe photon number; `None` picks the optimum.
    pub n_p: Option<f64>,
    pub gamma_x: f64,
    pub gamma_s: f64,
    pub eta: f64,
    pub squeeze_db: f64,
    pub amplification_db: f64,
    pub angle_mode: AngleMode,
    /// Radians, used with `angle_mode = "fixed"`.
    pub theta: f64,
    pub phi: f64,
    pub zeta: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            n_p: None,
            gamma_x: DEFAULT_GAMMA_X,
            gamma_s: DEFAULT_GAMMA_S,
            eta: DEFAULT_ETA,
            squeeze_db: 0.0,
            amplification_db: 0.0,
            angle_mode: AngleMode::AnalyticOptimal,
            theta: 0.0,
            phi: 0.0,
            zeta: std::f64::consts::FRAC_PI_2,
        }
    }
}

pub fn squeeze_from_db(field: &'static str, db: f64) -> CliResult<f64> {
    if !(db.is_finite() && db >= 0.0) {
        return Err(CliError::Config(format!("invalid `{field}`: must be finite and >= 0 dB, got {db}")));
    }
    Ok(db_to_squeeze(db))
}

impl ProbeConfig {
    /// Chain with `n_p` resolved and, unless the mode is numeric, the angles set.
    pub fn resolve(&self) -> CliResult<ChainConfig> {
        let r = squeeze_from_db("squeeze_db", self.squeeze_db)?;
        let big_r = squeeze_from_db("amplification_db", self.amplification_db)?;
        let n_p = match self.n_p {
            Some(n) => n,
            None => np_opt(self.gamma_s, self.eta, r, big_r).map_err(|e| {
                CliError::from(e).with_hint("set `n_p` explicitly; without SPM or detection loss the error keeps falling with probe power")
            })?,
        };
        let cfg = ChainConfig {
            n_p,
            gamma_x: self.gamma_x,
            gamma_s: self.gamma_s,
            eta: self.eta,
            r,
            theta: self.theta,
            big_r,
            phi: self.phi,
            zeta: self.zeta,
        };
        cfg.validate()?;
        Ok(match self.angle_mode {
            AngleMode::AnalyticOptimal => with_optimal_angles(&cfg),
            AngleMode::NumericOptimal | AngleMode::Fixed => cfg,
        })
    }
}

/// Reads a JSON object from `path`; I/O failures map to exit code 4, syntax to 2.
pub fn read_json(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if !value.is_object() {
        return Err(CliError::Config(format!("{}: expected a JSON object", path.display())));
    }
    Ok(value)
}

/// JSON merge patch: objects merge key by key, everything else is replaced.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

pub fn from_value<T: DeserializeOwned>(value: Value, what: &str) -> CliResult<T> {
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("{what}: {e}")))
}

/// `T::default()` overlaid with the file at `path`, if any, then with `overrides`.
pub fn load<T: DeserializeOwned + Serialize + Default>(
    path: Option<&Path>,
    overrides: Value,
) -> CliResult<T> {
    let mut value = serde_json::to_value(T::default()).expect("defaults serialize");
    let what = match path {
        Some(p) => {
            merge(&mut value, read_json(p)?);
            p.display().to_string()
        }
        None => "defaults".to_string(),
    };
    merge(&mut value, overrides);
    from_value(value, &what)
}
