//! Deterministic and mini-batch gradient access.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::SmoothFn;

/// Batch size `b_k` as a function of the iteration index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum BatchSchedule {
    /// Exact gradient every iteration.
    Full,
    Constant(usize),
    /// `⌈p·n⌉` samples per iteration.
    FractionOfTrain(f64),
    /// `min(n, ⌈c·√k⌉)`.
    SqrtGrowth(f64),
}

impl BatchSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BatchSchedule::Full => Ok(()),
            BatchSchedule::Constant(b) if b >= 1 => Ok(()),
            BatchSchedule::Constant(_) => Err(Error::invalid("batch", "constant batch must be >= 1")),
            BatchSchedule::FractionOfTrain(p) if p > 0.0 && p <= 1.0 => Ok(()),
            BatchSchedule::FractionOfTrain(p) => {
                Err(Error::invalid("batch", format!("fraction must lie in (0, 1], got {p}")))
            }
            BatchSchedule::SqrtGrowth(c) if c.is_finite() && c > 0.0 => Ok(()),
            BatchSchedule::SqrtGrowth(c) => {
                Err(Error::invalid("batch", format!("growth constant must be > 0, got {c}")))
            }
        }
    }

    /// `b_k`, always in `[1, n]`.
    pub fn batch_size(&self, k: u64, n: usize) -> usize {
        let b = match *self {
            BatchSchedule::Full => n,
            BatchSchedule::Constant(b) => b,
            BatchSchedule::FractionOfTrain(p) => (p * n as f64).ceil() as usize,
            BatchSchedule::SqrtGrowth(c) => (c * (k as f64).sqrt()).ceil() as usize,
        };
        b.clamp(1, n.max(1))
    }

    pub fn is_full(&self) -> bool {
        matches!(self, BatchSchedule::Full)
    }
}

/// Oracle bookkeeping that a snapshot needs to resume a run bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleState {
    pub schedule: BatchSchedule,
    pub evaluations: u64,
    pub rng: ChaCha8Rng,
}

/// Gradient access for one solver run. Samples are drawn i.i.d. uniformly
/// (with replacement) from a seeded generator.
pub struct GradientOracle<'a> {
    problem: &'a dyn SmoothFn,
    schedule: BatchSchedule,
    rng: ChaCha8Rng,
    evaluations: u64,
}

impl<'a> GradientOracle<'a> {
    pub fn new(problem: &'a dyn SmoothFn, schedule: BatchSchedule, seed: u64) -> Result<Self> {
        schedule.validate()?;
        Ok(GradientOracle { problem, schedule, rng: ChaCha8Rng::seed_from_u64(seed), evaluations: 0 })
    }

    pub fn full(problem: &'a dyn SmoothFn) -> Self {
        GradientOracle {
            problem,
            schedule: BatchSchedule::Full,
            rng: ChaCha8Rng::seed_from_u64(0),
            evaluations: 0,
        }
    }

    pub fn from_state(problem: &'a dyn SmoothFn, state: OracleState) -> Result<Self> {
        state.schedule.validate()?;
        Ok(GradientOracle {
            problem,
            schedule: state.schedule,
            rng: state.rng,
            evaluations: state.evaluations,
        })
    }

    pub fn state(&self) -> OracleState {
        OracleState { schedule: self.schedule, evaluations: self.evaluations, rng: self.rng.clone() }
    }

    pub fn problem(&self) -> &'a dyn SmoothFn {
        self.problem
    }

    pub fn schedule(&self) -> BatchSchedule {
        self.schedule
    }

    /// Returns `g_k` and the batch size used for iteration `k ≥ 1`.
    pub fn query(&mut self, x: &[f64], k: u64) -> Result<(Vec<f64>, usize)> {
        if k == 0 {
            return Err(Error::invalid("k", "iterations are numbered from 1"));
        }
        let n = self.problem.num_samples();
        let b = self.schedule.batch_size(k, n);
        let g = if self.schedule.is_full() {
            crate::linalg::check_dim(self.problem.dim(), x.len())?;
            self.problem.gradient(x)
        } else {
            let indices: Vec<usize> = (0..b).map(|_| self.rng.random_range(0..n)).collect();
            self.problem.gradient_batch(x, &indices)?
        };
        self.evaluations += b as u64;
        Ok((g, b))
    }

    /// `δ = ∇f(x) − g`. Costs one full gradient.
    pub fn noise(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        self.problem.gradient(x).iter().zip(g).map(|(t, s)| t - s).collect()
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    /// Per-sample gradient evaluations divided by `n`.
    pub fn epochs_elapsed(&self) -> f64 {
        self.evaluations as f64 / self.problem.num_samples() as f64
    }
}
