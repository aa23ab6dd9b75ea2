use serde::{Deserialize, Serialize};

use super::{check_hyper, initial_point, StepReport};
use crate::error::Result;
use crate::linalg::{axpy, dist, forward_step};
use crate::oracle::GradientOracle;
use crate::prox::Regularizer;

/// Adaptive proximal gradient method.
///
/// Each step takes `x_{k+1} = prox_{η_k h}(x_k − η_k g_k)` with `η_k = η/S_k`,
/// then grows `S²_{k+1} = S²_k (1 + ‖x_{k+1} − x_k‖²/η²)`, which equals
/// `γ² + Σ_{j≤k} ‖𝒢̃_j‖²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaProx {
    k: u64,
    x: Vec<f64>,
    s_sq: f64,
    s: f64,
    eta: f64,
    gamma: f64,
    /// `Σ x_{k+1}` over completed steps.
    sum_x: Vec<f64>,
    last_step_norm: f64,
}

impl AdaProx {
    pub fn new(x1: Vec<f64>, gamma: f64, eta: f64, h: &Regularizer) -> Result<Self> {
        check_hyper(gamma, eta)?;
        let x = initial_point(x1, h)?;
        let d = x.len();
        Ok(AdaProx {
            k: 1,
            x,
            s_sq: gamma * gamma,
            s: gamma,
            eta,
            gamma,
            sum_x: vec![0.0; d],
            last_step_norm: 0.0,
        })
    }

    /// Index of the next step.
    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn iterate(&self) -> &[f64] {
        &self.x
    }

    /// `S_k` for the next step.
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn s_sq(&self) -> f64 {
        self.s_sq
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `η_k = η/S_k` for the next step.
    pub fn step_size(&self) -> f64 {
        self.eta / self.s
    }

    pub fn last_step_norm(&self) -> f64 {
        self.last_step_norm
    }

    /// `x̄_t = (1/t) Σ_{k=1}^t x_{k+1}`; `None` before the first step.
    pub fn averaged_iterate(&self) -> Option<Vec<f64>> {
        let t = self.k - 1;
        (t > 0).then(|| self.sum_x.iter().map(|s| s / t as f64).collect())
    }

    pub fn step(&mut self, h: &Regularizer, oracle: &mut GradientOracle<'_>) -> Result<StepReport> {
        let (g, batch) = oracle.query(&self.x, self.k)?;
        let s_used = self.s;
        let eta_k = self.eta / s_used;
        let next = h.prox(eta_k, &forward_step(&self.x, eta_k, &g))?;
        let moved = dist(&next, &self.x);
        self.s_sq *= 1.0 + (moved / self.eta).powi(2);
        self.s = self.s_sq.sqrt();
        axpy(1.0, &next, &mut self.sum_x);
        self.x = next;
        self.last_step_norm = moved;
        let report = StepReport {
            k: self.k,
            batch,
            s: Some(s_used),
            step_size: eta_k,
            map_norm: moved / eta_k,
            move_norm: moved,
            theta: None,
        };
        self.k += 1;
        Ok(report)
    }
}
