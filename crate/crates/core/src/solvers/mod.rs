//! The adaptive method, its accelerated variant, and the proximal gradient
//! baseline, each as a resumable stepper, plus the run loop that drives them.

mod accadaprox;
mod adaprox;
mod pg;
mod run;
mod smoothness;

use serde::{Deserialize, Serialize};

pub use accadaprox::{next_alpha, AccAdaProx};
pub use adaprox::AdaProx;
pub use pg::{PgStepRule, ProxGradient};
pub use run::{resume, run, Algorithm, Budget, RunContext, RunDiagnostics, RunOptions, Snapshot, Trace};
pub use smoothness::estimate_smoothness;

use crate::error::{Error, Result};
use crate::linalg::check_finite;
use crate::oracle::GradientOracle;
use crate::prox::Regularizer;

/// Cheap per-iteration quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    /// Index of the step just taken.
    pub k: u64,
    pub batch: usize,
    /// `S_k` used by this step (adaptive methods only).
    pub s: Option<f64>,
    /// `η/S_k` for the adaptive methods, `α_k` for the baseline.
    pub step_size: f64,
    /// `‖𝒢̃_k‖`: the move divided by `step_size`.
    pub map_norm: f64,
    /// `‖x_{k+1} − x_k‖`, or `‖z_{k+1} − z_k‖` for the accelerated method.
    pub move_norm: f64,
    /// `θ_k = 1/α_k` (accelerated method only).
    pub theta: Option<f64>,
}

fn check_hyper(gamma: f64, eta: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid("gamma", format!("must be finite and > 0, got {gamma}")));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid("eta", format!("must be finite and > 0, got {eta}")));
    }
    Ok(())
}

fn initial_point(x1: Vec<f64>, h: &Regularizer) -> Result<Vec<f64>> {
    check_finite(&x1, "initial point")?;
    if !h.contains(&x1) {
        return Err(Error::OutsideDomain);
    }
    Ok(x1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum SolverState {
    AdaProx(AdaProx),
    AccAdaProx(AccAdaProx),
    Pg(ProxGradient),
}

impl SolverState {
    pub fn new(algorithm: &Algorithm, x1: Vec<f64>, h: &Regularizer) -> Result<Self> {
        Ok(match *algorithm {
            Algorithm::AdaProx { gamma, eta } => SolverState::AdaProx(AdaProx::new(x1, gamma, eta, h)?),
            Algorithm::AccAdaProx { gamma, eta } => {
                SolverState::AccAdaProx(AccAdaProx::new(x1, gamma, eta, h)?)
            }
            Algorithm::Pg { rule } => SolverState::Pg(ProxGradient::new(x1, rule, h)?),
        })
    }

    pub fn step(&mut self, h: &Regularizer, oracle: &mut GradientOracle<'_>) -> Result<StepReport> {
        match self {
            SolverState::AdaProx(s) => s.step(h, oracle),
            SolverState::AccAdaProx(s) => s.step(h, oracle),
            SolverState::Pg(s) => s.step(h, oracle),
        }
    }

    /// Index of the next step; `k − 1` steps are done.
    pub fn k(&self) -> u64 {
        match self {
            SolverState::AdaProx(s) => s.k(),
            SolverState::AccAdaProx(s) => s.k(),
            SolverState::Pg(s) => s.k(),
        }
    }

    /// The point whose metrics are reported: `x_k`, or `y_k` when accelerated.
    pub fn report_point(&self) -> &[f64] {
        match self {
            SolverState::AdaProx(s) => s.iterate(),
            SolverState::AccAdaProx(s) => s.y(),
            SolverState::Pg(s) => s.iterate(),
        }
    }

    /// The point whose distance to a reference solution bounds the diameter.
    pub fn prox_center(&self) -> &[f64] {
        match self {
            SolverState::AdaProx(s) => s.iterate(),
            SolverState::AccAdaProx(s) => s.z(),
            SolverState::Pg(s) => s.iterate(),
        }
    }

    pub fn averaged_point(&self) -> Option<Vec<f64>> {
        match self {
            SolverState::AdaProx(s) => s.averaged_iterate(),
            SolverState::AccAdaProx(s) => s.averaged_iterate(),
            SolverState::Pg(_) => None,
        }
    }

    pub fn s(&self) -> Option<f64> {
        match self {
            SolverState::AdaProx(s) => Some(s.s()),
            SolverState::AccAdaProx(s) => Some(s.s()),
            SolverState::Pg(_) => None,
        }
    }

    pub fn next_step_size(&self) -> f64 {
        match self {
            SolverState::AdaProx(s) => s.step_size(),
            SolverState::AccAdaProx(s) => s.step_size(),
            SolverState::Pg(s) => s.step_size(),
        }
    }

    pub fn dim(&self) -> usize {
        self.report_point().len()
    }
}
