//! Benchmark suites `fig1`–`fig4` and `desk`, at desk or full scale.

use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use adaprox_core::{fit_loglog_slope, BatchSchedule, Budget, Reference, TraceRecord};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AlgorithmKind, Cadence, DataSource, PgStep, ProblemKind, RunConfig, DESK_LOGISTIC, DESK_SVM};
use crate::experiment::{execute, preparation_key, prepare, write_outcome, HarnessError, Outcome, Prepared};

pub const DATA_DIR_ENV: &str = "ADAPROX_DATA_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Desk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scale {
    Desk,
    Full,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Fig1 => "fig1",
            Suite::Fig2 => "fig2",
            Suite::Fig3 => "fig3",
            Suite::Fig4 => "fig4",
            Suite::Desk => "desk",
        })
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Full => "full",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Job {
    pub name: String,
    pub config: RunConfig,
}

/// File name expected under the data directory for each full-scale dataset.
pub fn dataset_file(name: &str) -> &'static str {
    match name {
        "mnist" => "mnist",
        "a9a" => "a9a",
        "w6a" => "w6a",
        "connect4" => "connect-4",
        other => panic!("unknown dataset {other}"),
    }
}

pub fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("data"))
}

/// Desk-scale mini-batch standing in for 512 samples of a ~17k-sample set.
const DESK_MINIBATCH: usize = 8;
const DESK_EPOCHS: f64 = 200.0;

fn eta_name(eta: f64) -> String {
    format!("eta{eta}")
}

fn base(problem: ProblemKind, data: DataSource) -> RunConfig {
    RunConfig { problem, data, ..RunConfig::default() }
}

fn full_data(dir: &Path, name: &str) -> DataSource {
    DataSource::File(dir.join(dataset_file(name)))
}

/// The configurations of one suite, in output order.
pub fn plan(suite: Suite, scale: Scale, dir: &Path) -> Result<Vec<Job>, HarnessError> {
    let full = scale == Scale::Full;
    let mut jobs = Vec::new();
    match suite {
        Suite::Fig1 => {
            let mut cfg = if full {
                let mut c = base(ProblemKind::Svm, full_data(dir, "mnist"));
                c.labels = adaprox_core::problems::LabelRule::Mnist;
                c
            } else {
                base(ProblemKind::Svm, DataSource::Synthetic(DESK_SVM))
            };
            cfg.budget = Budget::Iterations(if full { 10_000 } else { 4000 });
            for algorithm in [AlgorithmKind::AdaProx, AlgorithmKind::AccAdaProx] {
                for eta in [1.0, 10.0, 100.0] {
                    let config = RunConfig { algorithm, eta, ..cfg.clone() };
                    jobs.push(Job { name: format!("{algorithm}_{}", eta_name(eta)), config });
                }
            }
            for c in [0.1, 1.0, 10.0] {
                let config = RunConfig { algorithm: AlgorithmKind::Pg, pg_step: PgStep::OverL(c), ..cfg.clone() };
                jobs.push(Job { name: format!("pg_{c}L"), config });
            }
        }
        Suite::Fig2 => {
            let mut cfg = if full {
                base(ProblemKind::Svm, full_data(dir, "a9a"))
            } else {
                base(ProblemKind::Svm, DataSource::Synthetic(DESK_SVM))
            };
            cfg.train_frac = Some(0.8);
            cfg.eta = 10.0;
            cfg.budget = Budget::Epochs(if full { 1000.0 } else { DESK_EPOCHS });
            cfg.metric_cadence = Cadence::Epoch;
            for (label, batch) in [
                ("0.1pct", BatchSchedule::FractionOfTrain(0.001)),
                ("1pct", BatchSchedule::FractionOfTrain(0.01)),
                ("10pct", BatchSchedule::FractionOfTrain(0.1)),
                ("50pct", BatchSchedule::FractionOfTrain(0.5)),
                ("100pct", BatchSchedule::Full),
            ] {
                jobs.push(Job { name: format!("batch_{label}"), config: RunConfig { batch, ..cfg.clone() } });
            }
        }
        Suite::Fig3 | Suite::Fig4 => {
            let fig4 = suite == Suite::Fig4;
            let mut cfg = if full {
                base(ProblemKind::Logistic, full_data(dir, if fig4 { "connect4" } else { "w6a" }))
            } else {
                base(ProblemKind::Logistic, DataSource::Synthetic(DESK_LOGISTIC))
            };
            cfg.reference = true;
            cfg.batch = BatchSchedule::Constant(if full { 512 } else { DESK_MINIBATCH });
            cfg.budget = Budget::Epochs(if full { 1000.0 } else { DESK_EPOCHS });
            cfg.metric_cadence = Cadence::Epoch;
            let etas: &[f64] = if fig4 { &[10.0] } else { &[0.1, 1.0, 10.0, 100.0] };
            if fig4 {
                cfg.lambda = 0.0;
                cfg.train_frac = Some(0.8);
            }
            for algorithm in [AlgorithmKind::AdaProx, AlgorithmKind::AccAdaProx] {
                for &eta in etas {
                    let config = RunConfig { algorithm, eta, ..cfg.clone() };
                    jobs.push(Job { name: format!("{algorithm}_{}", eta_name(eta)), config });
                }
            }
        }
        Suite::Desk => {
            if full {
                return Err(crate::config::ConfigError::Invalid {
                    key: "scale".into(),
                    reason: "the desk suite only runs at desk scale".into(),
                }
                .into());
            }
            let mut logistic = base(ProblemKind::Logistic, DataSource::Synthetic(DESK_LOGISTIC));
            logistic.reference = true;
            logistic.metric_cadence = Cadence::Every(1);
            jobs.push(Job {
                name: "logistic_adaprox_eta1".into(),
                config: RunConfig { eta: 1.0, budget: Budget::Iterations(5000), ..logistic.clone() },
            });
            for eta in [1.0, 10.0, 100.0] {
                jobs.push(Job {
                    name: format!("logistic_accadaprox_{}", eta_name(eta)),
                    config: RunConfig {
                        algorithm: AlgorithmKind::AccAdaProx,
                        eta,
                        budget: Budget::Iterations(2000),
                        ..logistic.clone()
                    },
                });
            }
            let svm = base(ProblemKind::Svm, DataSource::Synthetic(DESK_SVM));
            jobs.push(Job {
                name: "svm_adaprox_eta1".into(),
                config: RunConfig {
                    eta: 1.0,
                    budget: Budget::Iterations(4000),
                    metric_cadence: Cadence::Every(1),
                    ..svm
                },
            });
        }
    }
    Ok(jobs)
}

/// Full-scale files a plan needs that are not on disk.
pub fn missing_files(jobs: &[Job]) -> Vec<PathBuf> {
    let mut missing: Vec<PathBuf> = jobs
        .iter()
        .filter_map(|j| match &j.config.data {
            DataSource::File(p) if !p.exists() => Some(p.clone()),
            _ => None,
        })
        .collect();
    missing.dedup();
    missing
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Slope {
    /// Column the slope was fitted to.
    pub metric: &'static str,
    pub value: Option<f64>,
}

/// Log-log slope against iteration count over the second half of the usable
/// rows: suboptimality for convex runs (the averaged iterate for AdaProx),
/// `avg_sq_gradmap` otherwise. Rows at the reference floor are dropped.
pub fn rate_slope(records: &[TraceRecord], algorithm: AlgorithmKind, reference: Option<&Reference>) -> Slope {
    let (metric, series): (&'static str, Vec<(f64, f64)>) = match reference {
        Some(r) => {
            let averaged = algorithm == AlgorithmKind::AdaProx;
            let series = records
                .iter()
                .filter(|row| row.k > 0)
                .filter_map(|row| {
                    let value = if averaged { row.subopt_avg(r)? } else { row.subopt? };
                    (!r.at_floor(value)).then_some((row.k as f64, value))
                })
                .collect();
            (if averaged { "subopt_avg" } else { "subopt" }, series)
        }
        None => (
            "avg_sq_gradmap",
            records.iter().filter(|row| row.k > 0).map(|row| (row.k as f64, row.avg_sq_gradmap)).collect(),
        ),
    };
    Slope { metric, value: fit_loglog_slope(&series, 0.5).ok() }
}

#[derive(Debug, Clone, Serialize)]
pub struct JobSummary {
    pub name: String,
    pub csv: String,
    pub rows: usize,
    pub iterations: u64,
    pub epochs: f64,
    pub f: f64,
    pub f_avg: Option<f64>,
    pub subopt: Option<f64>,
    pub subopt_avg: Option<f64>,
    pub gradmap: f64,
    pub avg_sq_gradmap: f64,
    pub test_acc: Option<f64>,
    pub slope: Slope,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub suite: String,
    pub scale: String,
    pub jobs: Vec<JobSummary>,
}

fn summarize(job: &Job, outcome: &Outcome, prepared: &Prepared) -> JobSummary {
    let last = outcome.final_row();
    let reference = prepared.reference.as_ref().map(|(r, _)| r);
    JobSummary {
        name: job.name.clone(),
        csv: format!("{}.csv", job.name),
        rows: outcome.records.len(),
        iterations: last.k,
        epochs: last.epochs,
        f: last.f,
        f_avg: last.f_avg,
        subopt: last.subopt,
        subopt_avg: reference.and_then(|r| last.subopt_avg(r)),
        gradmap: last.gradmap,
        avg_sq_gradmap: last.avg_sq_gradmap,
        test_acc: last.test_acc,
        slope: rate_slope(&outcome.records, job.config.algorithm, reference),
    }
}

pub struct BenchOptions<'a> {
    pub suite: Suite,
    pub scale: Scale,
    pub out_dir: &'a Path,
    pub jobs: usize,
    pub overrides: &'a [String],
    pub data_dir: &'a Path,
}

/// Runs a suite, writing `<name>.csv`/`<name>.json` per job and
/// `summary.json`, all under `out_dir`.
pub fn run_bench(opts: &BenchOptions<'_>) -> Result<Summary, HarnessError> {
    let mut jobs = plan(opts.suite, opts.scale, opts.data_dir)?;
    for job in &mut jobs {
        job.config.apply_overrides(opts.overrides)?;
        job.config.validate()?;
        job.config.output = opts.out_dir.join(format!("{}.csv", job.name));
    }
    let missing = missing_files(&jobs);
    if !missing.is_empty() {
        let list: Vec<String> = missing.iter().map(|p| p.display().to_string()).collect();
        return Err(HarnessError::Data(format!(
            "missing dataset file(s): {} (set {DATA_DIR_ENV} to the directory holding them)",
            list.join(", ")
        )));
    }

    let mut keys: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut groups = Vec::with_capacity(jobs.len());
    for job in &jobs {
        let key = preparation_key(&job.config);
        let next = keys.len();
        let g = *index.entry(key.clone()).or_insert(next);
        if g == next {
            keys.push(key);
        }
        groups.push(g);
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Runtime(e.to_string()))?;
    let prepared: Vec<Prepared> = pool.install(|| {
        keys.par_iter()
            .map(|key| {
                let first = groups.iter().position(|&g| keys[g] == *key).expect("every key has a job");
                prepare(&jobs[first].config)
            })
            .collect::<Result<_, _>>()
    })?;

    fs::create_dir_all(opts.out_dir)
        .map_err(|e| HarnessError::Runtime(format!("{}: {e}", opts.out_dir.display())))?;
    let summaries: Vec<JobSummary> = pool.install(|| {
        jobs.par_iter()
            .zip(groups.par_iter())
            .map(|(job, &g)| {
                let outcome = execute(&job.config, &prepared[g])?;
                write_outcome(&outcome, &job.config.output)?;
                Ok(summarize(job, &outcome, &prepared[g]))
            })
            .collect::<Result<_, HarnessError>>()
    })?;

    let summary = Summary { suite: opts.suite.to_string(), scale: opts.scale.to_string(), jobs: summaries };
    let path = opts.out_dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    fs::write(&path, text).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(summary)
}
