//! `kerrqnd`: sweeps, single-point reports, thresholds, resonator factors
//! and Monte-Carlo checks for the squeezed-probe Kerr QND model.

pub mod config;
pub mod error;
pub mod svg;
pub mod sweep;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kerr_qnd::analytic::{dns2_coherent, dns2_squeezed};
use kerr_qnd::chain::measurement_error;
use kerr_qnd::montecarlo::{self, McConfig};
use kerr_qnd::optimizer::{minimize_angles, AngleSearch};
use kerr_qnd::resonator::{gamma_factors, loading_check, LoadingReport, ResonatorSpec};
use kerr_qnd::thresholds::{dns_max, single_photon_check};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

pub use error::{CliError, CliResult};

use config::{AngleMode, ProbeConfig};
use sweep::{Axis, Preset, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "kerrqnd", version, about = "Sensitivity of squeezed-light Kerr QND photon counting")]
pub struct Cli {
    /// JSON file with the command's inputs; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot (sweep only).
    #[arg(long, global = true)]
    pub svg: bool,
    /// Monte-Carlo seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ΔN_s of one configuration: closed form, chain and optionally optimizer.
    Error(ErrorArgs),
    /// ΔN_s over probe power or amplification, written as CSV.
    Sweep(SweepArgs),
    /// Non-Gaussianity and single-photon thresholds.
    Thresholds(ThresholdArgs),
    /// Γ_X, Γ_S and the loading check for a resonator spec (TOML or JSON).
    Resonator(ResonatorArgs),
    /// Monte-Carlo check of ΔN_s and the gain.
    Mc(McArgs),
}

#[derive(Debug, Args, Default)]
pub struct ErrorArgs {
    #[arg(long)]
    pub n_p: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub squeeze_db: Option<f64>,
    #[arg(long)]
    pub amplification_db: Option<f64>,
    #[arg(long, value_enum)]
    pub angle_mode: Option<AngleMode>,
    /// Also run the numeric angle optimizer.
    #[arg(long)]
    pub optimize: bool,
}

#[derive(Debug, Args, Default)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub angle_mode: Option<AngleMode>,
}

#[derive(Debug, Args, Default)]
pub struct ThresholdArgs {
    /// Signal quantum efficiency.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Measurement error ΔN_meas, photons.
    #[arg(long)]
    pub dns: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct ResonatorArgs {
    /// Probe detection efficiency for the loading check.
    #[arg(long, default_value_t = config::DEFAULT_ETA)]
    pub eta: f64,
}

#[derive(Debug, Args, Default)]
pub struct McArgs {
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub injected_dns: Option<f64>,
}

/// Overrides from flags, as a JSON merge patch.
fn patch(pairs: &[(&str, Option<Value>)]) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        if let Some(v) = v {
            m.insert((*k).to_string(), v.clone());
        }
    }
    Value::Object(m)
}

fn opt<T: Serialize>(v: Option<T>) -> Option<Value> {
    v.map(|v| serde_json::to_value(v).expect("flag values serialize"))
}

/// `key = value` lines, nested keys joined with dots.
pub fn key_values(title: &str, value: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, v) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, v, out);
                }
            }
            Value::String(s) => out.push_str(&format!("{prefix} = {s}\n")),
            other => out.push_str(&format!("{prefix} = {other}\n")),
        }
    }
    let mut out = format!("# {title}\n");
    walk("", value, &mut out);
    out
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}

/// Prints the report and, with `--out`, stores it as `<name>.json`.
fn emit(cli: &Cli, name: &str, report: &Value) -> CliResult<String> {
    let mut text = key_values(name, report);
    if let Some(dir) = &cli.out {
        let json = serde_json::to_string_pretty(report).expect("report serializes") + "\n";
        let path = write_file(dir, &format!("{name}.json"), &json)?;
        text.push_str(&format!("# wrote {}\n", path.display()));
    }
    Ok(text)
}

#[derive(Debug, Serialize)]
struct NumericAngles {
    delta_ns: f64,
    theta: f64,
    phi: f64,
    zeta: f64,
    evaluations: usize,
}

fn cmd_error(cli: &Cli, args: &ErrorArgs) -> CliResult<String> {
    let probe: ProbeConfig = config::load(
        cli.config.as_deref(),
        patch(&[
            ("n_p", opt(args.n_p)),
            ("eta", opt(args.eta)),
            ("squeeze_db", opt(args.squeeze_db)),
            ("amplification_db", opt(args.amplification_db)),
            ("angle_mode", opt(args.angle_mode)),
        ]),
    )?;
    let mut chain = probe.resolve()?;
    let numeric = if args.optimize || probe.angle_mode == AngleMode::NumericOptimal {
        let res = minimize_angles(&chain, &AngleSearch::default())?;
        Some(NumericAngles {
            delta_ns: res.best_value.sqrt(),
            theta: res.theta,
            phi: res.phi,
            zeta: res.zeta,
            evaluations: res.evaluations,
        })
    } else {
        None
    };
    if probe.angle_mode == AngleMode::NumericOptimal {
        let n = numeric.as_ref().expect("optimizer ran");
        chain = chain.with_angles(n.theta, n.phi, n.zeta);
    }
    let out = measurement_error(&chain)?;
    let report = json!({
        "inputs": probe,
        "n_p": chain.n_p,
        "n_p_source": if probe.n_p.is_some() { "config" } else { "optimal" },
        "angles": { "theta": chain.theta, "phi": chain.phi, "zeta": chain.zeta },
        "analytic_dns": dns2_squeezed(chain.n_p, chain.gamma_x, chain.gamma_s, chain.eta, chain.r, chain.big_r).sqrt(),
        "chain_dns": out.delta_ns,
        "gain": out.gain,
        "noise_variance": out.noise_variance,
        "coherent_dns": dns2_coherent(chain.n_p, chain.gamma_x, chain.gamma_s, chain.eta).sqrt(),
        "numeric": numeric,
    });
    emit(cli, "error", &report)
}

fn sweep_plot(spec: &SweepSpec, res: &sweep::SweepResult) -> CliResult<String> {
    let series = res
        .labels
        .iter()
        .zip(&res.values)
        .map(|(l, col)| svg::Series {
            label: l.clone(),
            points: res.axis.iter().copied().zip(col.iter().copied()).collect(),
        })
        .collect();
    let ng = dns_max(spec.non_gaussian_mu)?;
    let (title, x_label) = match spec.axis {
        Axis::ProbePhotons => ("Measurement error vs probe photons", "probe photons N_p"),
        Axis::AmplificationDb => ("Optimized measurement error vs amplification", "amplification, dB"),
    };
    Ok(svg::render(&svg::Plot {
        title: title.into(),
        x_label: x_label.into(),
        y_label: "ΔN_s, photons".into(),
        x_log: spec.axis == Axis::ProbePhotons && spec.range.log,
        y_log: true,
        series,
        ref_lines: vec![
            svg::RefLine { label: "single photon".into(), y: 1.0, dash: None },
            svg::RefLine {
                label: format!("non-Gaussian, μ={}", spec.non_gaussian_mu),
                y: ng,
                dash: Some("2,3"),
            },
        ],
    }))
}

fn cmd_sweep(cli: &Cli, args: &SweepArgs) -> CliResult<String> {
    let file = match &cli.config {
        Some(p) => Some(config::read_json(p)?),
        None => None,
    };
    let file_preset = file
        .as_ref()
        .and_then(|v| v.get("preset").cloned())
        .map(|p| config::from_value::<Preset>(p, "preset"))
        .transpose()?;
    let preset = args.preset.or(file_preset).unwrap_or(Preset::Fig3);
    let mut value = serde_json::to_value(SweepSpec::preset(preset)).expect("spec serializes");
    if let Some(mut f) = file {
        f.as_object_mut().expect("checked object").remove("preset");
        config::merge(&mut value, f);
    }
    config::merge(
        &mut value,
        patch(&[
            ("angle_mode", opt(args.angle_mode)),
            ("range", args.points.map(|p| json!({ "points": p }))),
        ]),
    );
    let what = cli.config.as_ref().map(|p| p.display().to_string()).unwrap_or("preset".into());
    let spec: SweepSpec = config::from_value(value, &what)?;
    let res = sweep::run(&spec)?;

    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let csv = write_file(&dir, &format!("{}.csv", spec.name), &sweep::to_csv(&res))?;
    let meta_json = serde_json::to_string_pretty(&res.metadata).expect("metadata serializes") + "\n";
    let meta = write_file(&dir, &format!("{}.meta.json", spec.name), &meta_json)?;
    let mut files = vec![csv.display().to_string(), meta.display().to_string()];
    if cli.svg {
        let path = write_file(&dir, &format!("{}.svg", spec.name), &sweep_plot(&spec, &res)?)?;
        files.push(path.display().to_string());
    }

    let minima: Map<String, Value> = res
        .labels
        .iter()
        .zip(&res.values)
        .map(|(l, col)| {
            let (i, v) = col
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
            (l.clone(), json!({ "axis": res.axis[i], "delta_ns": v }))
        })
        .collect();
    let report = json!({ "name": spec.name, "points": spec.range.points, "minima": minima, "files": files });
    Ok(key_values("sweep", &report))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ThresholdFile {
    mu: f64,
    dns: f64,
}

impl Default for ThresholdFile {
    fn default() -> Self {
        Self { mu: 0.9, dns: 1.0 }
    }
}

fn cmd_thresholds(cli: &Cli, args: &ThresholdArgs) -> CliResult<String> {
    let t: ThresholdFile =
        config::load(cli.config.as_deref(), patch(&[("mu", opt(args.mu)), ("dns", opt(args.dns))]))?;
    let rep = single_photon_check(t.dns, t.mu)?;
    let value = json!({
        "mu": rep.mu,
        "dns_meas": rep.dns_meas,
        "ns_star": rep.ns_star,
        "margin_max": rep.margin_max,
        "dns_max": rep.dns_max,
        "single_photon_feasible": rep.single_photon_feasible,
        "non_gaussian_feasible": rep.non_gaussian_feasible,
        "single_photon_ns": rep.single_photon_ns,
        "min_ns_margin": rep.min_ns_margin,
        "order_of_magnitude": rep.order_of_magnitude,
    });
    emit(cli, "thresholds", &value)
}

fn cmd_resonator(cli: &Cli, args: &ResonatorArgs) -> CliResult<String> {
    let spec = match &cli.config {
        None => ResonatorSpec::caf2(),
        Some(p) if p.extension().is_some_and(|e| e == "json") => {
            let spec: ResonatorSpec = config::from_value(config::read_json(p)?, &p.display().to_string())?;
            spec.validate()?;
            spec
        }
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            ResonatorSpec::from_toml_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
    };
    let (gamma_x, gamma_s) = gamma_factors(&spec)?;
    let LoadingReport { ratio, epsilon2, verdict } = loading_check(&spec, args.eta)?;
    let value = json!({
        "spec": spec,
        "gamma_x": gamma_x,
        "gamma_s": gamma_s,
        "eta": args.eta,
        "loading": { "ratio": ratio, "epsilon2": epsilon2, "verdict": verdict.to_string() },
    });
    emit(cli, "resonator", &value)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct McFile {
    seed: u64,
    n_samples: usize,
    injected_dns: f64,
    probe: ProbeConfig,
}

impl Default for McFile {
    fn default() -> Self {
        Self {
            seed: 42,
            n_samples: 1_000_000,
            injected_dns: 10.0,
            probe: ProbeConfig { squeeze_db: 10.0, amplification_db: 40.0, ..ProbeConfig::default() },
        }
    }
}

fn cmd_mc(cli: &Cli, args: &McArgs) -> CliResult<String> {
    let f: McFile = config::load(
        cli.config.as_deref(),
        patch(&[
            ("seed", opt(cli.seed)),
            ("n_samples", opt(args.samples)),
            ("injected_dns", opt(args.injected_dns)),
        ]),
    )?;
    if f.probe.angle_mode == AngleMode::NumericOptimal {
        return Err(CliError::Config("invalid `probe.angle_mode`: mc needs analytic_optimal or fixed".into()));
    }
    let chain = f.probe.resolve()?;
    let rep = montecarlo::run(&McConfig {
        seed: f.seed,
        n_samples: f.n_samples,
        injected_dns: f.injected_dns,
        chain,
    })?;
    let z = (rep.empirical_dns - rep.analytic_dns) / rep.stderr_dns;
    let value = json!({
        "seed": f.seed,
        "chain": chain,
        "report": rep,
        "dns_z_score": z,
        "within_3_sigma": z.abs() < 3.0,
    });
    emit(cli, "mc", &value)
}

/// Runs the command and returns what it prints on success.
pub fn run(cli: &Cli) -> CliResult<String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("invalid `threads`: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Error(a) => cmd_error(cli, a),
        Command::Sweep(a) => cmd_sweep(cli, a),
        Command::Thresholds(a) => cmd_thresholds(cli, a),
        Command::Resonator(a) => cmd_resonator(cli, a),
        Command::Mc(a) => cmd_mc(cli, a),
    })
}
