//! Turns a [`RunConfig`] into prepared data, a solver run, and its outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};

use adaprox_core::problems::{load_libsvm_raw, normalize_rows, split_train_test};
use adaprox_core::solvers::RunDiagnostics;
use adaprox_core::{
    compute_reference, estimate_smoothness, run, Algorithm, Dataset, Loss, Objective, PgStepRule, Reference,
    ReferenceOptions, Regularizer, RunContext, RunOptions, TraceRecord,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{AlgorithmKind, Cadence, ConfigError, DataSource, PgStep, ProblemKind, RunConfig};
use crate::output;

/// Failures mapped to process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("data error: {0}")]
    Data(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Data(_) => 3,
            HarnessError::Runtime(_) => 1,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Runtime(e.to_string())
}

/// Trains on `train`; everything a group of runs over the same data shares.
pub struct Prepared {
    pub source: String,
    pub sha256: String,
    pub train: Arc<Dataset>,
    pub test: Option<Dataset>,
    pub objective: Objective,
    pub h: Regularizer,
    pub reference: Option<(Reference, ReferenceOptions)>,
    smoothness: OnceLock<f64>,
}

impl Prepared {
    /// `L̂` from a fixed-seed estimator run, computed on first use.
    pub fn smoothness(&self) -> f64 {
        *self
            .smoothness
            .get_or_init(|| estimate_smoothness(&self.objective, 200, 0).expect("200 trials is valid"))
    }

    pub fn smoothness_if_computed(&self) -> Option<f64> {
        self.smoothness.get().copied()
    }
}

/// Keys that determine the prepared data, regularizer and reference.
pub const PREPARATION_KEYS: [&str; 14] = [
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
    "reference",
    "reference_budget",
    "reference_eta",
];

pub fn preparation_key(cfg: &RunConfig) -> String {
    PREPARATION_KEYS.iter().map(|k| format!("{k}={}\n", cfg.get(k).expect("known key"))).collect()
}

fn load_dataset(cfg: &RunConfig) -> Result<(Dataset, String, String), HarnessError> {
    match &cfg.data {
        DataSource::File(path) => {
            let bytes = fs::read(path).map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))?;
            let sha = hex::encode(Sha256::digest(&bytes));
            let text = String::from_utf8(bytes)
                .map_err(|_| HarnessError::Data(format!("{}: not valid UTF-8", path.display())))?;
            let raw = adaprox_core::problems::parse_libsvm(&text)
                .map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))?;
            let ds = raw
                .into_dataset(cfg.labels, cfg.dim)
                .map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))?;
            Ok((ds, path.display().to_string(), sha))
        }
        DataSource::Synthetic(spec) => {
            let ds = spec.generate().map_err(|e| HarnessError::Data(e.to_string()))?;
            let ds = match cfg.dim {
                Some(d) => ds.with_dim(d).map_err(|e| HarnessError::Data(e.to_string()))?,
                None => ds,
            };
            let sha = hex::encode(Sha256::digest(ds.to_libsvm().as_bytes()));
            Ok((ds, cfg.get("data").expect("known key"), sha))
        }
    }
}

pub fn prepare(cfg: &RunConfig) -> Result<Prepared, HarnessError> {
    cfg.validate()?;
    let (mut ds, source, sha256) = load_dataset(cfg)?;
    if let Some(m) = cfg.subsample {
        ds = ds.subsample(m, cfg.split_seed);
    }
    if cfg.normalize {
        ds = normalize_rows(ds);
    }
    let (train, test) = match cfg.train_frac {
        Some(frac) => {
            let (train, test) =
                split_train_test(&ds, frac, cfg.split_seed).map_err(|e| HarnessError::Data(e.to_string()))?;
            (train, Some(test))
        }
        None => (ds, None),
    };
    let train = Arc::new(train);
    let loss = match cfg.problem {
        ProblemKind::Svm => Loss::TanhSvm { mu: cfg.mu },
        ProblemKind::Logistic => Loss::Logistic,
    };
    let objective = Objective::new(loss, train.clone()).map_err(|e| HarnessError::Data(e.to_string()))?;
    let h = Regularizer::l1_box(cfg.lambda, cfg.radius).map_err(|e| ConfigError::Invalid {
        key: "lambda".into(),
        reason: e.to_string(),
    })?;
    let reference = if cfg.reference {
        let opts = ReferenceOptions { budget: cfg.reference_budget, eta: cfg.reference_eta, ..Default::default() };
        Some((compute_reference(&objective, &h, &opts).map_err(runtime)?, opts))
    } else {
        None
    };
    Ok(Prepared { source, sha256, train, test, objective, h, reference, smoothness: OnceLock::new() })
}

pub fn effective_cadence(cfg: &RunConfig, prepared: &Prepared) -> u64 {
    match cfg.metric_cadence {
        Cadence::Every(c) => c,
        Cadence::Epoch => {
            let n = prepared.train.len();
            (n as u64).div_ceil(cfg.batch.batch_size(1, n) as u64)
        }
    }
}

pub fn algorithm(cfg: &RunConfig, prepared: &Prepared) -> Algorithm {
    match cfg.algorithm {
        AlgorithmKind::AdaProx => Algorithm::AdaProx { gamma: cfg.gamma, eta: cfg.eta },
        AlgorithmKind::AccAdaProx => Algorithm::AccAdaProx { gamma: cfg.gamma, eta: cfg.eta },
        AlgorithmKind::Pg => Algorithm::Pg {
            rule: match cfg.pg_step {
                PgStep::OverL(c) => PgStepRule::Constant(c / prepared.smoothness()),
                PgStep::Constant(a) => PgStepRule::Constant(a),
                PgStep::InvSqrt(a) => PgStepRule::InvSqrt(a),
            },
        },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetInfo {
    pub source: String,
    pub sha256: String,
    pub n_train: usize,
    pub n_test: Option<usize>,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceInfo {
    pub f_ref: f64,
    pub tol_ref: f64,
    pub budget: u64,
    pub gamma: f64,
    pub eta: f64,
    pub starts: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sidecar {
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub dataset: DatasetInfo,
    pub reference: Option<ReferenceInfo>,
    pub smoothness_estimate: Option<f64>,
    pub metric_cadence: u64,
    pub cadence_contract: String,
    pub rows: usize,
    pub diagnostics: RunDiagnostics,
    pub final_row: TraceRecord,
}

pub struct Outcome {
    pub records: Vec<TraceRecord>,
    pub sidecar: Sidecar,
}

impl Outcome {
    pub fn csv(&self) -> String {
        output::trace_csv(&self.records)
    }

    pub fn sidecar_json(&self) -> String {
        serde_json::to_string_pretty(&self.sidecar).expect("sidecar serializes") + "\n"
    }

    pub fn final_row(&self) -> &TraceRecord {
        self.records.last().expect("row 0 always exists")
    }
}

/// Runs one configuration against prepared data. Nothing is written.
pub fn execute(cfg: &RunConfig, prepared: &Prepared) -> Result<Outcome, HarnessError> {
    let cadence = effective_cadence(cfg, prepared);
    let mut opts = RunOptions::new(algorithm(cfg, prepared), cfg.budget);
    opts.schedule = cfg.batch;
    opts.seed = cfg.seed;
    opts.metric_cadence = cadence;
    opts.record_wall_clock = cfg.record_wall_clock;
    let mut ctx = RunContext::new(&prepared.objective, prepared.h);
    ctx.test_set = prepared.test.as_ref();
    ctx.reference = prepared.reference.as_ref().map(|(r, _)| r);
    let trace = run(ctx, &opts).map_err(runtime)?;

    let sidecar = Sidecar {
        config: cfg.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        seed: cfg.seed,
        dataset: DatasetInfo {
            source: prepared.source.clone(),
            sha256: prepared.sha256.clone(),
            n_train: prepared.train.len(),
            n_test: prepared.test.as_ref().map(Dataset::len),
            dim: prepared.train.dim(),
        },
        reference: prepared.reference.as_ref().map(|(r, o)| ReferenceInfo {
            f_ref: r.f_ref,
            tol_ref: r.tol_ref,
            budget: o.budget,
            gamma: o.gamma,
            eta: o.eta,
            starts: 3,
        }),
        smoothness_estimate: prepared.smoothness_if_computed(),
        metric_cadence: cadence,
        cadence_contract: format!(
            "row 0 is the starting point; then one row every {cadence} iterations and one after the last"
        ),
        rows: trace.records.len(),
        diagnostics: trace.diagnostics,
        final_row: trace.records.last().expect("row 0 always exists").clone(),
    };
    Ok(Outcome { records: trace.records, sidecar })
}

/// `trace.csv` → `trace.json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    output.with_extension("json")
}

pub fn write_outcome(outcome: &Outcome, output: &Path) -> Result<(), HarnessError> {
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    }
    fs::write(output, outcome.csv()).map_err(|e| runtime(format!("{}: {e}", output.display())))?;
    let side = sidecar_path(output);
    fs::write(&side, outcome.sidecar_json()).map_err(|e| runtime(format!("{}: {e}", side.display())))?;
    Ok(())
}

/// Loads, runs and writes one configuration.
pub fn solve(cfg: &RunConfig) -> Result<Outcome, HarnessError> {
    let prepared = prepare(cfg)?;
    let outcome = execute(cfg, &prepared)?;
    write_outcome(&outcome, &cfg.output)?;
    Ok(outcome)
}

/// Reads a config file (if any) and applies overrides on top.
pub fn load_config<S: AsRef<str>>(path: Option<&Path>, overrides: &[S]) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = path {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError::Unreadable { path: path.display().to_string(), reason: e.to_string() })?;
        cfg.apply_text(&text)?;
    }
    cfg.apply_overrides(overrides)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Raw-file summary without running anything; used by `data inspect`.
pub fn read_raw(path: &Path) -> Result<adaprox_core::problems::RawLibsvm, HarnessError> {
    load_libsvm_raw(path).map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))
}
