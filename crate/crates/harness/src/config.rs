//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment and blank lines are ignored.
//! Later assignments (including `--set` overrides) replace earlier ones.
//! [`RunConfig::to_text`] writes every key in canonical form, and parsing that
//! text gives back an identical config.

use std::fmt;
use std::path::PathBuf;

use adaprox_core::problems::{LabelRule, SyntheticSpec};
use adaprox_core::{BatchSchedule, Budget};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("cannot read config {path}: {reason}")]
    Unreadable { path: String, reason: String },
}

impl ConfigError {
    /// The key the error refers to, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey(key) | ConfigError::Invalid { key, .. } => Some(key),
            _ => None,
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// Tanh-loss SVM with a ridge term; nonconvex.
    Svm,
    /// Logistic regression; convex.
    Logistic,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    File(PathBuf),
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgorithmKind {
    AdaProx,
    AccAdaProx,
    Pg,
}

/// How the proximal gradient baseline picks its step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PgStep {
    /// `c / L̂` with `L̂` from the smoothness estimator.
    OverL(f64),
    Constant(f64),
    /// `a / √k`.
    InvSqrt(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cadence {
    Every(u64),
    /// One row per pass over the training set at the first batch size.
    Epoch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub data: DataSource,
    pub labels: LabelRule,
    /// Pads the feature dimension up to this value.
    pub dim: Option<usize>,
    pub subsample: Option<usize>,
    pub normalize: bool,
    /// Fraction of samples used for training; the rest measure test accuracy.
    pub train_frac: Option<f64>,
    pub split_seed: u64,
    pub lambda: f64,
    pub mu: f64,
    pub radius: f64,
    pub algorithm: AlgorithmKind,
    pub gamma: f64,
    pub eta: f64,
    pub pg_step: PgStep,
    pub batch: BatchSchedule,
    pub budget: Budget,
    pub seed: u64,
    pub metric_cadence: Cadence,
    pub reference: bool,
    pub reference_budget: u64,
    pub reference_eta: f64,
    pub record_wall_clock: bool,
    pub output: PathBuf,
}

/// Synthetic logistic data used when no dataset is configured.
pub const DESK_LOGISTIC: SyntheticSpec = SyntheticSpec { n: 200, d: 20, margin: 0.1, flip: 0.0, seed: 1 };

/// Synthetic stand-in for a 2000-sample a9a subsample: 123 features and
/// roughly 15% label noise.
pub const DESK_SVM: SyntheticSpec = SyntheticSpec { n: 2000, d: 123, margin: 0.0, flip: 0.15, seed: 2 };

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: ProblemKind::Logistic,
            data: DataSource::Synthetic(DESK_LOGISTIC),
            labels: LabelRule::Sign,
            dim: None,
            subsample: None,
            normalize: true,
            train_frac: None,
            split_seed: 0,
            lambda: 1e-3,
            mu: 1e-3,
            radius: 50.0,
            algorithm: AlgorithmKind::AdaProx,
            gamma: 1.0,
            eta: 10.0,
            pg_step: PgStep::OverL(1.0),
            batch: BatchSchedule::Full,
            budget: Budget::Iterations(1000),
            seed: 0,
            metric_cadence: Cadence::Every(10),
            reference: false,
            reference_budget: 100_000,
            reference_eta: 10.0,
            record_wall_clock: false,
            output: PathBuf::from("trace.csv"),
        }
    }
}

pub const KEYS: [&str; 24] = [
    "problem",
    "data",
    "labels",
    "dim",
    "subsample",
    "normalize",
    "train_frac",
    "split_seed",
    "lambda",
    "mu",
    "radius",
    "algorithm",
    "gamma",
    "eta",
    "pg_step",
    "batch",
    "budget",
    "seed",
    "metric_cadence",
    "reference",
    "reference_budget",
    "reference_eta",
    "record_wall_clock",
    "output",
];

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| invalid(key, format!("`{value}` is not a finite number")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64, ConfigError> {
    value.parse().map_err(|_| invalid(key, format!("`{value}` is not a nonnegative integer")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(invalid(key, format!("`{value}` is not a boolean"))),
    }
}

fn positive(key: &str, value: f64) -> Result<f64, ConfigError> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(invalid(key, format!("must be > 0, got {value}")))
    }
}

fn nonnegative(key: &str, value: f64) -> Result<f64, ConfigError> {
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(invalid(key, format!("must be >= 0, got {value}")))
    }
}

fn parse_optional<T>(value: &str, parse: impl FnOnce(&str) -> Result<T, ConfigError>) -> Result<Option<T>, ConfigError> {
    if value == "none" {
        Ok(None)
    } else {
        parse(value).map(Some)
    }
}

/// `n=200,d=20,margin=0.1,flip=0,seed=1`; omitted fields keep the desk
/// logistic values.
pub fn parse_synthetic(spec: &str) -> Result<SyntheticSpec, ConfigError> {
    let mut out = DESK_LOGISTIC;
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| invalid("data", format!("expected `name=value` in synthetic spec, got `{part}`")))?;
        match name.trim() {
            "n" => out.n = parse_u64("data", value.trim())? as usize,
            "d" => out.d = parse_u64("data", value.trim())? as usize,
            "margin" => out.margin = parse_f64("data", value.trim())?,
            "flip" => out.flip = parse_f64("data", value.trim())?,
            "seed" => out.seed = parse_u64("data", value.trim())?,
            other => return Err(invalid("data", format!("unknown synthetic field `{other}`"))),
        }
    }
    if out.n == 0 || out.d == 0 {
        return Err(invalid("data", "synthetic n and d must be positive"));
    }
    if !(0.0..1.0).contains(&out.margin) || !(0.0..=0.5).contains(&out.flip) {
        return Err(invalid("data", "synthetic margin must lie in [0, 1) and flip in [0, 0.5]"));
    }
    Ok(out)
}

fn format_synthetic(s: &SyntheticSpec) -> String {
    format!("synthetic:n={},d={},margin={},flip={},seed={}", s.n, s.d, s.margin, s.flip, s.seed)
}

fn parse_batch(value: &str) -> Result<BatchSchedule, ConfigError> {
    const KEY: &str = "batch";
    let schedule = if value == "full" {
        BatchSchedule::Full
    } else if let Some(p) = value.strip_suffix('%') {
        BatchSchedule::FractionOfTrain(parse_f64(KEY, p.trim())? / 100.0)
    } else if let Some(p) = value.strip_prefix("frac:") {
        BatchSchedule::FractionOfTrain(parse_f64(KEY, p.trim())?)
    } else if let Some(c) = value.strip_prefix("sqrt:") {
        BatchSchedule::SqrtGrowth(parse_f64(KEY, c.trim())?)
    } else {
        BatchSchedule::Constant(parse_u64(KEY, value)? as usize)
    };
    schedule.validate().map_err(|e| invalid(KEY, e.to_string()))?;
    Ok(schedule)
}

fn format_batch(b: &BatchSchedule) -> String {
    match *b {
        BatchSchedule::Full => "full".into(),
        BatchSchedule::Constant(b) => b.to_string(),
        BatchSchedule::FractionOfTrain(p) => format!("frac:{p}"),
        BatchSchedule::SqrtGrowth(c) => format!("sqrt:{c}"),
    }
}

fn parse_budget(value: &str) -> Result<Budget, ConfigError> {
    const KEY: &str = "budget";
    if let Some(n) = value.strip_prefix("iters:") {
        Ok(Budget::Iterations(parse_u64(KEY, n.trim())?))
    } else if let Some(e) = value.strip_prefix("epochs:") {
        Ok(Budget::Epochs(positive(KEY, parse_f64(KEY, e.trim())?)?))
    } else {
        Err(invalid(KEY, format!("expected `iters:N` or `epochs:E`, got `{value}`")))
    }
}

fn format_budget(b: &Budget) -> String {
    match *b {
        Budget::Iterations(n) => format!("iters:{n}"),
        Budget::Epochs(e) => format!("epochs:{e}"),
    }
}

fn parse_pg_step(value: &str) -> Result<PgStep, ConfigError> {
    const KEY: &str = "pg_step";
    let step = if let Some(c) = value.strip_suffix("/L") {
        PgStep::OverL(parse_f64(KEY, c.trim())?)
    } else if let Some(a) = value.strip_prefix("constant:") {
        PgStep::Constant(parse_f64(KEY, a.trim())?)
    } else if let Some(a) = value.strip_prefix("invsqrt:") {
        PgStep::InvSqrt(parse_f64(KEY, a.trim())?)
    } else {
        return Err(invalid(KEY, format!("expected `c/L`, `constant:a` or `invsqrt:a`, got `{value}`")));
    };
    let (PgStep::OverL(v) | PgStep::Constant(v) | PgStep::InvSqrt(v)) = step;
    positive(KEY, v)?;
    Ok(step)
}

fn format_pg_step(s: &PgStep) -> String {
    match *s {
        PgStep::OverL(c) => format!("{c}/L"),
        PgStep::Constant(a) => format!("constant:{a}"),
        PgStep::InvSqrt(a) => format!("invsqrt:{a}"),
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Svm => "svm",
            ProblemKind::Logistic => "logistic",
        })
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgorithmKind::AdaProx => "adaprox",
            AlgorithmKind::AccAdaProx => "accadaprox",
            AlgorithmKind::Pg => "pg",
        })
    }
}

impl RunConfig {
    /// Applies one assignment. Values are validated on their own here;
    /// cross-key checks happen in [`RunConfig::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let value = value.trim();
        match key {
            "problem" => {
                self.problem = match value {
                    "svm" => ProblemKind::Svm,
                    "logistic" => ProblemKind::Logistic,
                    _ => return Err(invalid(key, format!("expected `svm` or `logistic`, got `{value}`"))),
                }
            }
            "data" => {
                self.data = match value.strip_prefix("synthetic:") {
                    Some(spec) => DataSource::Synthetic(parse_synthetic(spec)?),
                    None if value.is_empty() => return Err(invalid(key, "empty path")),
                    None => DataSource::File(PathBuf::from(value)),
                }
            }
            "labels" => {
                self.labels = match value {
                    "sign" => LabelRule::Sign,
                    "mnist" => LabelRule::Mnist,
                    _ => return Err(invalid(key, format!("expected `sign` or `mnist`, got `{value}`"))),
                }
            }
            "dim" => {
                self.dim = parse_optional(value, |v| {
                    let d = parse_u64(key, v)? as usize;
                    if d == 0 {
                        return Err(invalid(key, "must be positive"));
                    }
                    Ok(d)
                })?
            }
            "subsample" => {
                self.subsample = parse_optional(value, |v| {
                    let m = parse_u64(key, v)? as usize;
                    if m == 0 {
                        return Err(invalid(key, "must be positive"));
                    }
                    Ok(m)
                })?
            }
            "normalize" => self.normalize = parse_bool(key, value)?,
            "train_frac" => {
                self.train_frac = parse_optional(value, |v| {
                    let p = parse_f64(key, v)?;
                    if !(p > 0.0 && p < 1.0) {
                        return Err(invalid(key, format!("must lie in (0, 1), got {p}")));
                    }
                    Ok(p)
                })?
            }
            "split_seed" => self.split_seed = parse_u64(key, value)?,
            "lambda" => self.lambda = nonnegative(key, parse_f64(key, value)?)?,
            "mu" => self.mu = nonnegative(key, parse_f64(key, value)?)?,
            "radius" => self.radius = positive(key, parse_f64(key, value)?)?,
            "algorithm" => {
                self.algorithm = match value {
                    "adaprox" => AlgorithmKind::AdaProx,
                    "accadaprox" => AlgorithmKind::AccAdaProx,
                    "pg" => AlgorithmKind::Pg,
                    _ => {
                        return Err(invalid(key, format!("expected `adaprox`, `accadaprox` or `pg`, got `{value}`")))
                    }
                }
            }
            "gamma" => self.gamma = positive(key, parse_f64(key, value)?)?,
            "eta" => self.eta = positive(key, parse_f64(key, value)?)?,
            "pg_step" => self.pg_step = parse_pg_step(value)?,
            "batch" => self.batch = parse_batch(value)?,
            "budget" => self.budget = parse_budget(value)?,
            "seed" => self.seed = parse_u64(key, value)?,
            "metric_cadence" => {
                self.metric_cadence = if value == "epoch" {
                    Cadence::Epoch
                } else {
                    let c = parse_u64(key, value)?;
                    if c == 0 {
                        return Err(invalid(key, "must be >= 1"));
                    }
                    Cadence::Every(c)
                }
            }
            "reference" => self.reference = parse_bool(key, value)?,
            "reference_budget" => {
                let b = parse_u64(key, value)?;
                if b < 1000 {
                    return Err(invalid(key, format!("must be >= 1000, got {b}")));
                }
                self.reference_budget = b;
            }
            "reference_eta" => self.reference_eta = positive(key, parse_f64(key, value)?)?,
            "record_wall_clock" => self.record_wall_clock = parse_bool(key, value)?,
            "output" => {
                if value.is_empty() {
                    return Err(invalid(key, "empty path"));
                }
                self.output = PathBuf::from(value);
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Canonical value text for `key`.
    pub fn get(&self, key: &str) -> Option<String> {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
        Some(match key {
            "problem" => self.problem.to_string(),
            "data" => match &self.data {
                DataSource::File(p) => p.display().to_string(),
                DataSource::Synthetic(s) => format_synthetic(s),
            },
            "labels" => match self.labels {
                LabelRule::Sign => "sign".into(),
                LabelRule::Mnist => "mnist".into(),
            },
            "dim" => opt(self.dim.map(|d| d.to_string())),
            "subsample" => opt(self.subsample.map(|m| m.to_string())),
            "normalize" => self.normalize.to_string(),
            "train_frac" => opt(self.train_frac.map(|p| p.to_string())),
            "split_seed" => self.split_seed.to_string(),
            "lambda" => self.lambda.to_string(),
            "mu" => self.mu.to_string(),
            "radius" => self.radius.to_string(),
            "algorithm" => self.algorithm.to_string(),
            "gamma" => self.gamma.to_string(),
            "eta" => self.eta.to_string(),
            "pg_step" => format_pg_step(&self.pg_step),
            "batch" => format_batch(&self.batch),
            "budget" => format_budget(&self.budget),
            "seed" => self.seed.to_string(),
            "metric_cadence" => match self.metric_cadence {
                Cadence::Every(c) => c.to_string(),
                Cadence::Epoch => "epoch".into(),
            },
            "reference" => self.reference.to_string(),
            "reference_budget" => self.reference_budget.to_string(),
            "reference_eta" => self.reference_eta.to_string(),
            "record_wall_clock" => self.record_wall_clock.to_string(),
            "output" => self.output.display().to_string(),
            _ => return None,
        })
    }

    /// Parses config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, text: content.to_string() })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Applies `key=value` overrides, as given on the command line.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<(), ConfigError> {
        for item in overrides {
            let item = item.as_ref();
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: 0, text: item.to_string() })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Every key in canonical order, one `key = value` per line.
    pub fn to_text(&self) -> String {
        KEYS.iter()
            .map(|k| format!("{k} = {}\n", self.get(k).expect("known key")))
            .collect()
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        KEYS.iter().map(|&k| (k, self.get(k).expect("known key"))).collect()
    }

    /// Checks that involve more than one key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.reference && self.problem != ProblemKind::Logistic {
            return Err(invalid("reference", "a reference optimum needs a convex problem (`problem = logistic`)"));
        }
        Ok(())
    }
}
