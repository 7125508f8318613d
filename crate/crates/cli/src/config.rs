//! Run configuration.
//!
//! A config file is a flat TOML table whose keys are the long flag names
//! without the leading dashes. Values from the
//! file are applied first and command-line flags override them, both through
//! [`RunConfig::set`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use qinterf_core::scenarios::ScenarioParams;
use qinterf_core::Tolerances;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("malformed config file: {0}")]
    Syntax(String),
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("cannot read config file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err("expected json or csv".into()),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Run,
    Fuzz,
}

/// Inclusive dimension range for the fuzzer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DimRange {
    pub min: usize,
    pub max: usize,
}

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 32;

impl FromStr for DimRange {
    type Err = String;
    /// `N`, `A..B` or `A..=B` (both inclusive).
    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| e.to_string());
        let (min, max) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let n = parse(s)?;
                (n, n)
            }
        };
        if min > max || min < MIN_DIM || max > MAX_DIM {
            return Err(format!("dimensions must satisfy {MIN_DIM} <= min <= max <= {MAX_DIM}"));
        }
        Ok(DimRange { min, max })
    }
}

impl fmt::Display for DimRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.min, self.max)
    }
}

/// Fully resolved configuration, embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub scenario: Option<String>,
    pub params: ScenarioParams,
    /// Scenario trials in run mode, randomized instances in fuzz mode.
    pub trials: u64,
    pub seed: Option<u64>,
    pub dims: DimRange,
    /// Coefficient samples per fuzz instance.
    pub samples: usize,
    pub tolerances: Tolerances,
    pub workers: usize,
    pub format: Format,
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[serde(skip)]
    pub inject_indefinite: bool,
}

pub const DEFAULT_FUZZ_TRIALS: u64 = 1000;
pub const DEFAULT_SAMPLES: usize = 256;
pub const MAX_WORKERS: usize = 256;

/// Keys accepted in config files and as flags.
pub const KEYS: &[&str] = &[
    "scenario",
    "phase-steps",
    "trials",
    "seed",
    "dims",
    "eta1",
    "eta2",
    "blocked",
    "spin-polar",
    "spin-azimuth",
    "samples",
    "tolerance",
    "tol-norm",
    "tol-hermitian",
    "tol-positivity",
    "tol-kernel",
    "output",
    "format",
    "workers",
];

impl RunConfig {
    pub fn new(mode: Mode) -> Self {
        let params = ScenarioParams::default();
        let trials = match mode {
            Mode::Run => params.trials,
            Mode::Fuzz => DEFAULT_FUZZ_TRIALS,
        };
        Self {
            mode,
            scenario: None,
            params,
            trials,
            seed: None,
            dims: DimRange { min: 2, max: 8 },
            samples: DEFAULT_SAMPLES,
            tolerances: Tolerances::default(),
            workers: 1,
            format: Format::Json,
            output: None,
            inject_indefinite: false,
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let invalid = |reason: String| ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
            reason,
        };
        fn num<T: FromStr>(v: &str) -> Result<T, String>
        where
            T::Err: fmt::Display,
        {
            v.parse::<T>().map_err(|e| e.to_string())
        }
        fn positive(v: &str) -> Result<f64, String> {
            let x: f64 = num(v)?;
            if x.is_finite() && x > 0.0 {
                Ok(x)
            } else {
                Err("must be a positive finite number".into())
            }
        }
        match key {
            "scenario" => self.scenario = Some(value.to_string()),
            "trials" => {
                self.trials = num(value).map_err(invalid)?;
                self.params.trials = self.trials;
            }
            "phase-steps" | "eta1" | "eta2" | "blocked" | "spin-polar" | "spin-azimuth" => {
                self.params.set(key, value).map_err(|e| invalid(e.to_string()))?
            }
            "seed" => self.seed = Some(num(value).map_err(invalid)?),
            "dims" => self.dims = value.parse().map_err(invalid)?,
            "samples" => self.samples = num(value).map_err(invalid)?,
            "tolerance" => {
                let t = positive(value).map_err(invalid)?;
                self.tolerances.theorem = t;
                self.tolerances.kernel = t;
            }
            "tol-norm" => self.tolerances.norm = positive(value).map_err(invalid)?,
            "tol-hermitian" => self.tolerances.hermitian = positive(value).map_err(invalid)?,
            "tol-positivity" => self.tolerances.positivity = positive(value).map_err(invalid)?,
            "tol-kernel" => self.tolerances.kernel = positive(value).map_err(invalid)?,
            "output" => self.output = Some(PathBuf::from(value)),
            "format" => self.format = value.parse().map_err(invalid)?,
            "workers" => {
                let w: usize = num(value).map_err(invalid)?;
                if !(1..=MAX_WORKERS).contains(&w) {
                    return Err(invalid(format!("must lie in [1, {MAX_WORKERS}]")));
                }
                self.workers = w;
            }
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    pub fn apply(&mut self, values: &BTreeMap<String, String>) -> Result<(), ConfigError> {
        values.iter().try_for_each(|(k, v)| self.set(k, v))
    }

    /// Final consistency checks after all sources are applied.
    pub fn validate(&self) -> Result<(), ConfigError> {
        match self.mode {
            Mode::Run => {
                if self.scenario.is_none() {
                    return Err(ConfigError::Invalid("run needs --scenario".into()));
                }
                self.params.validate().map_err(|e| ConfigError::Invalid(e.to_string()))
            }
            Mode::Fuzz => Ok(()),
        }
    }

    /// Seed, drawing one from process entropy when none was configured.
    pub fn resolve_seed(&mut self) -> u64 {
        *self.seed.get_or_insert_with(entropy_seed)
    }
}

fn entropy_seed() -> u64 {
    use std::hash::{BuildHasher, Hasher};
    let mut h = std::collections::hash_map::RandomState::new().build_hasher();
    h.write_u128(
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or_default(),
    );
    h.finish()
}

/// Parses config-file text (a flat TOML table) into key/value pairs.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
    let mut out = BTreeMap::new();
    for (key, value) in table {
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        let text = match value {
            toml::Value::String(s) => s,
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(x) => format!("{x:?}"),
            toml::Value::Boolean(b) => b.to_string(),
            _ => return Err(ConfigError::Syntax(format!("`{key}` must be a scalar"))),
        };
        out.insert(key, text);
    }
    Ok(out)
}

fn typed(value: &str) -> toml::Value {
    if let Ok(i) = value.parse::<i64>() {
        return toml::Value::Integer(i);
    }
    // seeds above i64::MAX stay strings
    match value.parse::<f64>() {
        Ok(x) if x.is_finite() && value.parse::<u64>().is_err() => toml::Value::Float(x),
        _ => toml::Value::String(value.to_string()),
    }
}

/// Renders key/value pairs in config-file syntax, in [`KEYS`] order.
pub fn render_config(values: &BTreeMap<String, String>) -> String {
    let mut out = String::new();
    for key in KEYS {
        if let Some(v) = values.get(*key) {
            let value = match typed(v) {
                toml::Value::Float(x) => format!("{x:?}"),
                other => other.to_string(),
            };
            out.push_str(&format!("{key} = {value}\n"));
        }
    }
    out
}

pub fn read_config_file(path: &std::path::Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}
