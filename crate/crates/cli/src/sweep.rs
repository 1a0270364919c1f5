//! Parameter sweeps over probe power or amplification, and their CSV form.

use std::fmt::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use kerr_qnd::analytic::{np_opt, with_optimal_angles};
use kerr_qnd::chain::measurement_error;
use kerr_qnd::optimizer::{minimize_angles, AngleSearch};
use kerr_qnd::ChainConfig;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{squeeze_from_db, AngleMode, DEFAULT_ETA, DEFAULT_GAMMA_S, DEFAULT_GAMMA_X};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    ProbePhotons,
    AmplificationDb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig3,
    Fig5,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl AxisRange {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                if i == 0 {
                    self.min
                } else if i + 1 == self.points {
                    self.max
                } else if self.log {
                    (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub label: Option<String>,
    pub squeeze_db: f64,
    /// Ignored when the axis is the amplification itself.
    #[serde(default)]
    pub amplification_db: f64,
}

impl Scenario {
    pub fn new(squeeze_db: f64, amplification_db: f64) -> Self {
        Self { label: None, squeeze_db, amplification_db }
    }

    fn label(&self, axis: Axis) -> String {
        match (&self.label, axis) {
            (Some(l), _) => l.clone(),
            (None, Axis::ProbePhotons) => {
                format!("sq{}dB_amp{}dB", self.squeeze_db, self.amplification_db)
            }
            (None, Axis::AmplificationDb) => format!("sq{}dB", self.squeeze_db),
        }
    }
}

/// Parameters shared by every point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    /// Probe photon number off the probe axis; `None` uses the optimum per point.
    pub n_p: Option<f64>,
    pub gamma_x: f64,
    pub gamma_s: f64,
    pub eta: f64,
    pub theta: f64,
    pub phi: f64,
    pub zeta: f64,
}

impl Default for FixedParams {
    fn default() -> Self {
        Self {
            n_p: None,
            gamma_x: DEFAULT_GAMMA_X,
            gamma_s: DEFAULT_GAMMA_S,
            eta: DEFAULT_ETA,
            theta: 0.0,
            phi: 0.0,
            zeta: std::f64::consts::FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Output file stem.
    pub name: String,
    pub axis: Axis,
    pub range: AxisRange,
    pub scenarios: Vec<Scenario>,
    pub fixed: FixedParams,
    pub angle_mode: AngleMode,
    /// Signal efficiency for the non-Gaussianity reference line.
    pub non_gaussian_mu: f64,
}

impl SweepSpec {
    /// ΔN_s against N_p for the four combinations of 0/10 dB squeezing
    /// and 0/40 dB amplification.
    pub fn fig3() -> Self {
        Self {
            name: "fig3".into(),
            axis: Axis::ProbePhotons,
            range: AxisRange { min: 1e4, max: 1e9, points: 101, log: true },
            scenarios: vec![
                Scenario::new(0.0, 0.0),
                Scenario::new(10.0, 0.0),
                Scenario::new(0.0, 40.0),
                Scenario::new(10.0, 40.0),
            ],
            fixed: FixedParams::default(),
            angle_mode: AngleMode::AnalyticOptimal,
            non_gaussian_mu: 0.95,
        }
    }

    /// Optimized ΔN_s against amplification at 10 dB squeezing.
    pub fn fig5() -> Self {
        Self {
            name: "fig5".into(),
            axis: Axis::AmplificationDb,
            range: AxisRange { min: 0.0, max: 40.0, points: 41, log: false },
            scenarios: vec![Scenario::new(10.0, 0.0)],
            fixed: FixedParams::default(),
            angle_mode: AngleMode::AnalyticOptimal,
            non_gaussian_mu: 0.95,
        }
    }

    pub fn preset(p: Preset) -> Self {
        match p {
            Preset::Fig3 => Self::fig3(),
            Preset::Fig5 => Self::fig5(),
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        let r = &self.range;
        if r.points < 2 {
            return Err(CliError::Config(format!("invalid `range.points`: need at least 2, got {}", r.points)));
        }
        if !(r.min.is_finite() && r.max.is_finite() && r.min < r.max) {
            return Err(CliError::Config(format!(
                "invalid `range`: need finite min < max, got [{}, {}]",
                r.min, r.max
            )));
        }
        if r.log && r.min <= 0.0 {
            return Err(CliError::Config(format!("invalid `range.min`: log axis needs min > 0, got {}", r.min)));
        }
        if self.axis == Axis::ProbePhotons && r.min <= 0.0 {
            return Err(CliError::Config(format!("invalid `range.min`: n_p must be > 0, got {}", r.min)));
        }
        if self.scenarios.is_empty() {
            return Err(CliError::Config("invalid `scenarios`: need at least one".into()));
        }
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(CliError::Config(format!("invalid `name`: {:?} is not a file stem", self.name)));
        }
        if !(self.non_gaussian_mu > 0.0 && self.non_gaussian_mu < 1.0) {
            return Err(CliError::Config(format!(
                "invalid `non_gaussian_mu`: must lie in (0, 1), got {}",
                self.non_gaussian_mu
            )));
        }
        Ok(())
    }

    pub fn labels(&self) -> Vec<String> {
        self.scenarios.iter().map(|s| s.label(self.axis)).collect()
    }

    /// Chain configuration at axis value `x` for scenario `s`, angles unset.
    fn point(&self, s: &Scenario, x: f64) -> CliResult<ChainConfig> {
        let f = &self.fixed;
        let r = squeeze_from_db("squeeze_db", s.squeeze_db)?;
        let (n_p, big_r) = match self.axis {
            Axis::ProbePhotons => (Some(x), squeeze_from_db("amplification_db", s.amplification_db)?),
            Axis::AmplificationDb => (f.n_p, squeeze_from_db("amplification_db", x)?),
        };
        let n_p = match n_p {
            Some(n) => n,
            None => np_opt(f.gamma_s, f.eta, r, big_r)?,
        };
        let cfg = ChainConfig {
            n_p,
            gamma_x: f.gamma_x,
            gamma_s: f.gamma_s,
            eta: f.eta,
            r,
            theta: f.theta,
            big_r,
            phi: f.phi,
            zeta: f.zeta,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn evaluate(&self, s: &Scenario, x: f64) -> CliResult<f64> {
        let cfg = self.point(s, x)?;
        let dns = match self.angle_mode {
            AngleMode::AnalyticOptimal => measurement_error(&with_optimal_angles(&cfg))?.delta_ns,
            AngleMode::Fixed => measurement_error(&cfg)?.delta_ns,
            AngleMode::NumericOptimal => minimize_angles(&cfg, &AngleSearch::default())?.best_value.sqrt(),
        };
        Ok(dns)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub spec: SweepSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: Vec<f64>,
    pub labels: Vec<String>,
    /// One column of ΔN_s per scenario, photons.
    pub values: Vec<Vec<f64>>,
    pub metadata: Metadata,
}

pub fn run(spec: &SweepSpec) -> CliResult<SweepResult> {
    spec.validate()?;
    let axis = spec.range.values();
    let values = spec
        .scenarios
        .iter()
        .map(|s| {
            axis.par_iter()
                .map(|&x| {
                    spec.evaluate(s, x).map_err(|e| match e {
                        CliError::Numeric { source, hint } => CliError::Numeric {
                            source,
                            hint: Some(hint.unwrap_or_else(|| {
                                format!("at axis value {x:e} of scenario {}", s.label(spec.axis))
                            })),
                        },
                        other => other,
                    })
                })
                .collect::<CliResult<Vec<f64>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    Ok(SweepResult {
        axis,
        labels: spec.labels(),
        values,
        metadata: Metadata {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp,
            spec: spec.clone(),
        },
    })
}

/// 17 significant digits, enough to round-trip every f64.
fn cell(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv(result: &SweepResult) -> String {
    let mut out = String::from("axis");
    for l in &result.labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    for (i, x) in result.axis.iter().enumerate() {
        out.push_str(&cell(*x));
        for col in &result.values {
            let _ = write!(out, ",{}", cell(col[i]));
        }
        out.push('\n');
    }
    out
}

/// Columns of a CSV written by [`to_csv`]: `(labels, axis, values)`.
pub type CsvTable = (Vec<String>, Vec<f64>, Vec<Vec<f64>>);

pub fn parse_csv(text: &str) -> Result<CsvTable, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty csv")?;
    let mut cols = header.split(',');
    if cols.next() != Some("axis") {
        return Err(format!("header must start with `axis`, got {header:?}"));
    }
    let labels: Vec<String> = cols.map(str::to_string).collect();
    let mut axis = Vec::new();
    let mut values = vec![Vec::new(); labels.len()];
    for (n, line) in lines.enumerate() {
        let cells = line
            .split(',')
            .map(|c| c.parse::<f64>().map_err(|e| format!("row {}: {c:?}: {e}", n + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        if cells.len() != labels.len() + 1 {
            return Err(format!("row {}: expected {} cells, got {}", n + 1, labels.len() + 1, cells.len()));
        }
        axis.push(cells[0]);
        for (col, v) in values.iter_mut().zip(&cells[1..]) {
            col.push(*v);
        }
    }
    Ok((labels, axis, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values_hit_both_ends() {
        let r = AxisRange { min: 1e4, max: 1e9, points: 6, log: true };
        let v = r.values();
        assert_eq!(v[0], 1e4);
        assert_eq!(v[5], 1e9);
        assert!((v[1] / 1e5 - 1.0).abs() < 1e-12);
        let lin = AxisRange { min: 0.0, max: 40.0, points: 41, log: false }.values();
        assert_eq!(lin[10], 10.0);
    }

    #[test]
    fn csv_round_trips_bit_exactly() {
        let mut spec = SweepSpec::fig3();
        spec.range.points = 7;
        let res = run(&spec).unwrap();
        let (labels, axis, values) = parse_csv(&to_csv(&res)).unwrap();
        assert_eq!(labels, res.labels);
        assert_eq!(axis, res.axis);
        assert_eq!(values, res.values);
    }

    #[test]
    fn invalid_specs() {
        let mut s = SweepSpec::fig3();
        s.range.points = 1;
        assert!(matches!(s.validate(), Err(CliError::Config(_))));
        let mut s = SweepSpec::fig3();
        s.range.min = 0.0;
        assert!(s.validate().is_err());
        let mut s = SweepSpec::fig5();
        s.scenarios.clear();
        assert!(s.validate().is_err());
    }
}
