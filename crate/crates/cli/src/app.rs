//! Command-line interface.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use qinterf_core::interferometer::{run_arrangement, Arrangement, Layout, OpticalElement};
use qinterf_core::scenarios::{list_scenarios, run_scenario_with};
use qinterf_core::{Basis, StateVector};
use serde::{Deserialize, Serialize};

use crate::config::{self, ConfigError, Mode, RunConfig};
use crate::fuzz::{run_fuzz, FuzzOptions};
use crate::parallel::ThreadedSampler;
use crate::report::{self, Report, ScenarioTables};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "qinterf",
    version,
    about = "Single-quantum interferometer and detector-coincidence simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario preset and write its report.
    Run(RunArgs),
    /// Check the coincidence theorem on randomized instances.
    Fuzz(FuzzArgs),
    /// List scenario presets and their parameters.
    List(ListArgs),
    /// Print a config file holding the defaults.
    Config(ConfigArgs),
    /// Propagate a state through an arrangement read from a JSON file.
    Propagate(PropagateArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    /// Relative tolerance for the theorem and kernel checks.
    #[arg(long)]
    pub tolerance: Option<String>,
    #[arg(long)]
    pub output: Option<String>,
    /// json or csv.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub phase_steps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta2: Option<String>,
    /// none, I or II.
    #[arg(long)]
    pub blocked: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub spin_polar: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub spin_azimuth: Option<String>,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Inclusive dimension range, e.g. 2..8.
    #[arg(long)]
    pub dims: Option<String>,
    /// Coefficient pairs per instance.
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long, hide = true)]
    pub inject_indefinite: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ListFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct ListArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: ListFormat,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Emit the keys of this scenario; without it, the fuzz keys.
    #[arg(long)]
    pub scenario: Option<String>,
}

#[derive(Debug, Args)]
pub struct PropagateArgs {
    /// JSON file with `basis`, `layout` and `elements`.
    pub arrangement: PathBuf,
    /// Basis label of the input state.
    #[arg(long)]
    pub input: String,
    /// Value for every swept phase shifter.
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] qinterf_core::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    /// Invariant failures exit 1, bad input exits 2.
    pub fn exit_code(&self) -> i32 {
        use qinterf_core::Error as E;
        match self {
            CliError::Core(
                E::NotHermitian { .. }
                | E::NotPositive { .. }
                | E::SpectrumAboveOne { .. }
                | E::ExpectationOutOfRange { .. }
                | E::ImaginaryResidue { .. }
                | E::IncompleteFamily { .. },
            ) => EXIT_FAILED,
            _ => EXIT_USAGE,
        }
    }
}

fn push(values: &mut BTreeMap<String, String>, key: &str, value: &Option<String>) {
    if let Some(v) = value {
        values.insert(key.to_string(), v.clone());
    }
}

fn common_flags(c: &CommonArgs) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    push(&mut m, "seed", &c.seed);
    push(&mut m, "trials", &c.trials);
    push(&mut m, "tolerance", &c.tolerance);
    push(&mut m, "output", &c.output);
    push(&mut m, "format", &c.format);
    push(&mut m, "workers", &c.workers);
    m
}

/// Defaults, then the config file, then flags.
fn resolve(mode: Mode, common: &CommonArgs, flags: BTreeMap<String, String>) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::new(mode);
    if let Some(path) = &common.config {
        let file = config::read_config_file(path)?;
        // `tolerance` is a shorthand, so apply it before the specific keys.
        if let Some(t) = file.get("tolerance") {
            cfg.set("tolerance", t)?;
        }
        cfg.apply(&file.into_iter().filter(|(k, _)| k != "tolerance").collect())?;
    }
    if let Some(t) = flags.get("tolerance") {
        cfg.set("tolerance", t)?;
    }
    cfg.apply(&flags.into_iter().filter(|(k, _)| k != "tolerance").collect())?;
    cfg.validate()?;
    Ok(cfg)
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Write {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn report_failures(checks: &[qinterf_core::scenarios::Check]) {
    for c in checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {} (residual {:e})", c.name, c.residual);
    }
}

fn cmd_run(args: &RunArgs) -> Result<i32, CliError> {
    let mut flags = common_flags(&args.common);
    push(&mut flags, "scenario", &args.scenario);
    push(&mut flags, "phase-steps", &args.phase_steps);
    push(&mut flags, "eta1", &args.eta1);
    push(&mut flags, "eta2", &args.eta2);
    push(&mut flags, "blocked", &args.blocked);
    push(&mut flags, "spin-polar", &args.spin_polar);
    push(&mut flags, "spin-azimuth", &args.spin_azimuth);
    let mut cfg = resolve(Mode::Run, &args.common, flags)?;
    let seed = cfg.resolve_seed();
    let scenario = cfg.scenario.clone().unwrap_or_default();
    let sampler = ThreadedSampler { workers: cfg.workers };
    let result = run_scenario_with(&scenario, &cfg.params, seed, &sampler)?;
    let checks = result.checks.clone();
    let report = Report {
        version: report::VERSION,
        config: cfg.clone(),
        seed,
        tables: ScenarioTables::from(result),
        checks,
    };
    emit(cfg.output.as_deref(), &report::render_scenario(&report, cfg.format))?;
    report_failures(&report.checks);
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_fuzz(args: &FuzzArgs) -> Result<i32, CliError> {
    let mut flags = common_flags(&args.common);
    push(&mut flags, "dims", &args.dims);
    push(&mut flags, "samples", &args.samples);
    let mut cfg = resolve(Mode::Fuzz, &args.common, flags)?;
    cfg.inject_indefinite = args.inject_indefinite;
    let seed = cfg.resolve_seed();
    let outcome = run_fuzz(&FuzzOptions {
        dims: cfg.dims,
        instances: cfg.trials,
        seed,
        samples: cfg.samples,
        tolerances: cfg.tolerances,
        workers: cfg.workers,
        inject_indefinite: cfg.inject_indefinite,
    })
    .map_err(CliError::Input)?;
    let report = Report {
        version: report::VERSION,
        config: cfg.clone(),
        seed,
        tables: outcome.tables,
        checks: outcome.checks,
    };
    emit(cfg.output.as_deref(), &report::render_fuzz(&report, cfg.format))?;
    if let Some(f) = &report.tables.failure {
        eprintln!(
            "instance {} (dim {}, seed {}) failed: {}",
            f.instance,
            f.dim,
            f.seed,
            f.error.as_deref().unwrap_or("unknown")
        );
    }
    report_failures(&report.checks);
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_list(args: &ListArgs) -> Result<i32, CliError> {
    let scenarios = list_scenarios();
    let text = match args.format {
        ListFormat::Json => report::to_json(&scenarios),
        ListFormat::Text => {
            let mut s = String::new();
            for sc in &scenarios {
                s.push_str(&format!("{}\n  {}\n", sc.name, sc.description));
                for p in &sc.params {
                    s.push_str(&format!(
                        "  --{:<13} {:<8} default {:<20} {}; {}\n",
                        p.name, p.kind, p.default, p.range, p.description
                    ));
                }
            }
            s
        }
    };
    emit(None, &text)?;
    Ok(EXIT_OK)
}

fn cmd_config(args: &ConfigArgs) -> Result<i32, CliError> {
    let mut values = BTreeMap::new();
    let defaults = RunConfig::new(if args.scenario.is_some() { Mode::Run } else { Mode::Fuzz });
    match &args.scenario {
        Some(name) => {
            let info = list_scenarios()
                .into_iter()
                .find(|s| s.name == name)
                .ok_or_else(|| qinterf_core::Error::UnknownScenario(name.clone()))?;
            values.insert("scenario".to_string(), name.clone());
            for p in info.params {
                values.insert(p.name.to_string(), p.default);
            }
        }
        None => {
            values.insert("dims".into(), defaults.dims.to_string());
            values.insert("trials".into(), defaults.trials.to_string());
            values.insert("samples".into(), defaults.samples.to_string());
        }
    }
    let t = defaults.tolerances;
    values.insert("tol-norm".into(), format!("{:?}", t.norm));
    values.insert("tol-hermitian".into(), format!("{:?}", t.hermitian));
    values.insert("tol-positivity".into(), format!("{:?}", t.positivity));
    values.insert("tol-kernel".into(), format!("{:?}", t.kernel));
    values.insert("format".into(), defaults.format.to_string());
    values.insert("workers".into(), defaults.workers.to_string());
    emit(None, &config::render_config(&values))?;
    Ok(EXIT_OK)
}

/// Arrangement file contents.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrangementFile {
    pub basis: Vec<String>,
    #[serde(default = "custom_layout")]
    pub layout: Layout,
    pub elements: Vec<OpticalElement>,
}

fn custom_layout() -> Layout {
    Layout::Custom
}

#[derive(Debug, Serialize)]
pub struct PropagationReport {
    pub version: &'static str,
    pub input: String,
    pub phase: Option<f64>,
    pub survival_probability: f64,
    pub amplitudes: BTreeMap<String, [f64; 2]>,
    pub probabilities: BTreeMap<String, f64>,
}

fn cmd_propagate(args: &PropagateArgs) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.arrangement)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.arrangement.display())))?;
    let file: ArrangementFile =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("invalid arrangement: {e}")))?;
    let basis = Basis::new(file.basis)?;
    let mut arrangement = Arrangement::new(basis.clone(), file.elements, file.layout)?;
    if let Some(phase) = args.phase {
        arrangement = arrangement.with_swept_phase(phase);
    }
    let input = StateVector::basis_state(basis.clone(), &args.input)?;
    let result = run_arrangement(&arrangement, &input)?;
    let state = &result.conditional_state;
    let report = PropagationReport {
        version: report::VERSION,
        input: args.input.clone(),
        phase: args.phase,
        survival_probability: result.survival_probability,
        amplitudes: basis
            .labels()
            .iter()
            .zip(state.amplitudes())
            .map(|(l, a)| (l.clone(), [a.re, a.im]))
            .collect(),
        probabilities: basis
            .labels()
            .iter()
            .zip(state.amplitudes())
            .map(|(l, a)| (l.clone(), a.norm_sqr()))
            .collect(),
    };
    emit(args.output.as_deref(), &report::to_json(&report))?;
    Ok(EXIT_OK)
}

/// Executes a parsed command and returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Fuzz(a) => cmd_fuzz(a),
        Command::List(a) => cmd_list(a),
        Command::Config(a) => cmd_config(a),
        Command::Propagate(a) => cmd_propagate(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    })
}
