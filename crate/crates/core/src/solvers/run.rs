use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{PgStepRule, SolverState, StepReport};
use crate::error::{Error, Result};
use crate::gradmap::stationarity_metric;
use crate::linalg::{check_dim, dist};
use crate::metrics::{Reference, TraceRecord};
use crate::oracle::{BatchSchedule, GradientOracle, OracleState};
use crate::problems::{test_accuracy, Dataset, SmoothFn};
use crate::prox::Regularizer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Algorithm {
    AdaProx { gamma: f64, eta: f64 },
    AccAdaProx { gamma: f64, eta: f64 },
    Pg { rule: PgStepRule },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Budget {
    /// Total number of steps.
    Iterations(u64),
    /// Total per-sample gradient evaluations divided by `n`.
    Epochs(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub algorithm: Algorithm,
    pub schedule: BatchSchedule,
    pub budget: Budget,
    pub seed: u64,
    /// Metrics rows are emitted every `metric_cadence` steps and after the last step.
    pub metric_cadence: u64,
    /// Starting point; the origin when `None`.
    pub x0: Option<Vec<f64>>,
    /// Otherwise `wall_s` is written as 0 so traces are reproducible byte for byte.
    pub record_wall_clock: bool,
}

impl RunOptions {
    pub fn new(algorithm: Algorithm, budget: Budget) -> Self {
        RunOptions {
            algorithm,
            schedule: BatchSchedule::Full,
            budget,
            seed: 0,
            metric_cadence: 1,
            x0: None,
            record_wall_clock: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        if self.metric_cadence == 0 {
            return Err(Error::invalid("metric_cadence", "must be >= 1"));
        }
        if let Budget::Epochs(e) = self.budget {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::invalid("budget", format!("epochs must be finite and > 0, got {e}")));
            }
        }
        if let Algorithm::Pg { rule } = self.algorithm {
            rule.validate()?;
        }
        Ok(())
    }
}

/// What a run is evaluated against; shared read-only between runs.
#[derive(Clone, Copy)]
pub struct RunContext<'a> {
    pub problem: &'a dyn SmoothFn,
    pub h: Regularizer,
    pub test_set: Option<&'a Dataset>,
    pub reference: Option<&'a Reference>,
}

impl<'a> RunContext<'a> {
    pub fn new(problem: &'a dyn SmoothFn, h: Regularizer) -> Self {
        RunContext { problem, h, test_set: None, reference: None }
    }

    fn validate(&self) -> Result<()> {
        self.h.validate()?;
        let d = self.problem.dim();
        if let Some(test) = self.test_set {
            check_dim(d, test.dim())?;
        }
        if let Some(reference) = self.reference {
            check_dim(d, reference.x_ref.len())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub iterations: u64,
    pub metric_cadence: u64,
    /// Largest `‖x_{k+1} − x_k‖` (or `‖z_{k+1} − z_k‖`).
    pub max_move: f64,
    /// Largest distance from the prox center to the reference solution.
    pub max_dist_to_reference: Option<f64>,
}

/// Everything needed to continue a run exactly where it stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub format: String,
    pub version: u32,
    pub solver: SolverState,
    pub oracle: OracleState,
    pub metric_sum_sq: f64,
    pub metric_rows: u64,
    pub diagnostics: RunDiagnostics,
}

impl Snapshot {
    pub const FORMAT: &'static str = "adaprox-snapshot";
    pub const VERSION: u32 = 1;

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("snapshot serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let snap: Snapshot = serde_json::from_str(text).map_err(|e| Error::Snapshot(e.to_string()))?;
        if snap.format != Self::FORMAT || snap.version != Self::VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported snapshot {} v{}",
                snap.format, snap.version
            )));
        }
        Ok(snap)
    }
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    /// One report per step taken by this call.
    pub steps: Vec<StepReport>,
    pub snapshot: Snapshot,
    pub diagnostics: RunDiagnostics,
}

struct Runner<'a> {
    ctx: RunContext<'a>,
    opts: &'a RunOptions,
    state: SolverState,
    oracle: GradientOracle<'a>,
    metric_sum_sq: f64,
    metric_rows: u64,
    diagnostics: RunDiagnostics,
    started: Instant,
}

impl<'a> Runner<'a> {
    fn completed(&self) -> u64 {
        self.state.k() - 1
    }

    fn exhausted(&self) -> bool {
        match self.opts.budget {
            Budget::Iterations(t) => self.completed() >= t,
            Budget::Epochs(e) => {
                let target = (e * self.ctx.problem.num_samples() as f64 - 1e-9).ceil() as u64;
                self.oracle.evaluations() >= target
            }
        }
    }

    fn objective(&self, x: &[f64]) -> Result<f64> {
        Ok(self
            .ctx
            .h
            .value(x)?
            .finite()
            .map_or(f64::INFINITY, |hv| self.ctx.problem.value(x) + hv))
    }

    fn record(&mut self, batch: usize) -> Result<TraceRecord> {
        let point = self.state.report_point();
        let f = self.objective(point)?;
        let gradmap = stationarity_metric(point, self.ctx.problem, &self.ctx.h)?;
        self.metric_sum_sq += gradmap * gradmap;
        self.metric_rows += 1;
        let f_avg = match self.state.averaged_point() {
            Some(avg) => Some(self.objective(&avg)?),
            None => None,
        };
        let test_acc = match self.ctx.test_set {
            Some(test) => Some(test_accuracy(test, point)?),
            None => None,
        };
        Ok(TraceRecord {
            k: self.completed(),
            epochs: self.oracle.epochs_elapsed(),
            wall_s: if self.opts.record_wall_clock { self.started.elapsed().as_secs_f64() } else { 0.0 },
            f,
            f_avg,
            subopt: self.ctx.reference.map(|r| f - r.f_ref),
            gradmap,
            avg_sq_gradmap: self.metric_sum_sq / self.metric_rows as f64,
            s: self.state.s(),
            step: self.state.next_step_size(),
            batch,
            test_acc,
        })
    }

    fn track_reference_distance(&mut self) {
        if let Some(reference) = self.ctx.reference {
            let gap = dist(self.state.prox_center(), &reference.x_ref);
            let worst = self.diagnostics.max_dist_to_reference.get_or_insert(0.0);
            *worst = worst.max(gap);
        }
    }

    fn drive(mut self, mut records: Vec<TraceRecord>) -> Result<Trace> {
        let mut steps = Vec::new();
        while !self.exhausted() {
            let report = self.state.step(&self.ctx.h, &mut self.oracle)?;
            self.diagnostics.max_move = self.diagnostics.max_move.max(report.move_norm);
            self.track_reference_distance();
            steps.push(report);
            if self.completed().is_multiple_of(self.opts.metric_cadence) || self.exhausted() {
                let row = self.record(report.batch)?;
                records.push(row);
            }
        }
        self.diagnostics.iterations = self.completed();
        self.diagnostics.metric_cadence = self.opts.metric_cadence;
        let snapshot = Snapshot {
            format: Snapshot::FORMAT.to_string(),
            version: Snapshot::VERSION,
            solver: self.state.clone(),
            oracle: self.oracle.state(),
            metric_sum_sq: self.metric_sum_sq,
            metric_rows: self.metric_rows,
            diagnostics: self.diagnostics.clone(),
        };
        Ok(Trace { records, steps, snapshot, diagnostics: self.diagnostics })
    }
}

/// Runs one solver until the budget is spent. Row 0 describes the starting
/// point; with a zero-iteration budget it is the only row.
pub fn run(ctx: RunContext<'_>, opts: &RunOptions) -> Result<Trace> {
    opts.validate()?;
    ctx.validate()?;
    let d = ctx.problem.dim();
    let x0 = match &opts.x0 {
        Some(x0) => {
            check_dim(d, x0.len())?;
            x0.clone()
        }
        None => vec![0.0; d],
    };
    let state = SolverState::new(&opts.algorithm, x0, &ctx.h)?;
    let oracle = GradientOracle::new(ctx.problem, opts.schedule, opts.seed)?;
    let mut runner = Runner {
        ctx,
        opts,
        state,
        oracle,
        metric_sum_sq: 0.0,
        metric_rows: 0,
        diagnostics: RunDiagnostics::default(),
        started: Instant::now(),
    };
    runner.track_reference_distance();
    let first = runner.record(0)?;
    runner.drive(vec![first])
}

/// Continues a run from a snapshot until `opts.budget` (counted from the
/// original start) is spent. Only rows after the snapshot are returned.
pub fn resume(ctx: RunContext<'_>, opts: &RunOptions, snapshot: Snapshot) -> Result<Trace> {
    opts.validate()?;
    ctx.validate()?;
    check_dim(ctx.problem.dim(), snapshot.solver.dim())?;
    let oracle = GradientOracle::from_state(ctx.problem, snapshot.oracle)?;
    let runner = Runner {
        ctx,
        opts,
        state: snapshot.solver,
        oracle,
        metric_sum_sq: snapshot.metric_sum_sq,
        metric_rows: snapshot.metric_rows,
        diagnostics: snapshot.diagnostics,
        started: Instant::now(),
    };
    runner.drive(Vec::new())
}
