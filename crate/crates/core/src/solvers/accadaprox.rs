use serde::{Deserialize, Serialize};

use super::{check_hyper, initial_point, StepReport};
use crate::error::Result;
use crate::linalg::{axpy, dist, forward_step};
use crate::oracle::GradientOracle;
use crate::prox::Regularizer;

/// `α_k = (1 + √(1 + 4α²_{k−1})) / 2`, so that `α_k² − α_k = α²_{k−1}`.
pub fn next_alpha(prev: f64) -> f64 {
    (1.0 + (1.0 + 4.0 * prev * prev).sqrt()) / 2.0
}

/// Adaptive accelerated proximal gradient method.
///
/// Per step, with `θ_k = 1/α_k`:
///
/// ```text
/// x_k     = (1 − θ_k) y_k + θ_k z_k
/// z_{k+1} = prox_{η/(θ_k S_k)·h}(z_k − η/(θ_k S_k) · g_k)      g_k queried at x_k
/// y_{k+1} = x_k + θ_k (z_{k+1} − z_k)
/// S²_{k+1} = S²_k (1 + ‖z_{k+1} − z_k‖²/η²)
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccAdaProx {
    k: u64,
    y: Vec<f64>,
    z: Vec<f64>,
    alpha_prev: f64,
    s_sq: f64,
    s: f64,
    eta: f64,
    gamma: f64,
    /// `Σ α_k y_k` and `Σ α_k` over completed steps.
    weighted_sum_y: Vec<f64>,
    weight_total: f64,
    last_z_move: f64,
    max_z_move: f64,
}

impl AccAdaProx {
    pub fn new(x1: Vec<f64>, gamma: f64, eta: f64, h: &Regularizer) -> Result<Self> {
        check_hyper(gamma, eta)?;
        let y = initial_point(x1, h)?;
        let d = y.len();
        Ok(AccAdaProx {
            k: 1,
            z: y.clone(),
            y,
            alpha_prev: 0.0,
            s_sq: gamma * gamma,
            s: gamma,
            eta,
            gamma,
            weighted_sum_y: vec![0.0; d],
            weight_total: 0.0,
            last_z_move: 0.0,
            max_z_move: 0.0,
        })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    /// The last iterate `y_k`, where convergence is measured.
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn alpha_prev(&self) -> f64 {
        self.alpha_prev
    }

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

    /// `η/S_k` for the next step (the prox step on `z` is this times `α_k`).
    pub fn step_size(&self) -> f64 {
        self.eta / self.s
    }

    pub fn weight_total(&self) -> f64 {
        self.weight_total
    }

    /// Largest `‖z_{k+1} − z_k‖` seen so far.
    pub fn max_z_move(&self) -> f64 {
        self.max_z_move
    }

    /// `ȳ_t = (Σ α_k)⁻¹ Σ α_k y_k` over `k = 1..t`; `None` before the first step.
    pub fn averaged_iterate(&self) -> Option<Vec<f64>> {
        (self.weight_total > 0.0)
            .then(|| self.weighted_sum_y.iter().map(|s| s / self.weight_total).collect())
    }

    pub fn step(&mut self, h: &Regularizer, oracle: &mut GradientOracle<'_>) -> Result<StepReport> {
        let alpha = next_alpha(self.alpha_prev);
        let theta = 1.0 / alpha;
        let x: Vec<f64> =
            self.y.iter().zip(&self.z).map(|(y, z)| (1.0 - theta) * y + theta * z).collect();
        let (g, batch) = oracle.query(&x, self.k)?;
        let s_used = self.s;
        let eta_k = self.eta / s_used;
        let prox_step = eta_k / theta;
        let z_next = h.prox(prox_step, &forward_step(&self.z, prox_step, &g))?;
        let y_next: Vec<f64> = x
            .iter()
            .zip(z_next.iter().zip(&self.z))
            .map(|(xi, (zn, zo))| xi + theta * (zn - zo))
            .collect();
        let moved = dist(&z_next, &self.z);

        axpy(alpha, &self.y, &mut self.weighted_sum_y);
        self.weight_total += alpha;
        self.s_sq *= 1.0 + (moved / self.eta).powi(2);
        self.s = self.s_sq.sqrt();
        self.y = y_next;
        self.z = z_next;
        self.alpha_prev = alpha;
        self.last_z_move = moved;
        self.max_z_move = self.max_z_move.max(moved);

        let report = StepReport {
            k: self.k,
            batch,
            s: Some(s_used),
            step_size: eta_k,
            map_norm: moved / eta_k,
            move_norm: moved,
            theta: Some(theta),
        };
        self.k += 1;
        Ok(report)
    }
}
