use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{check_dim, dot, norm_sq};

/// Smooth part `f` of the composite objective, written as a finite sum over
/// samples so that it can be queried in mini-batches.
pub trait SmoothFn: Send + Sync {
    fn dim(&self) -> usize;

    /// Number of samples a mini-batch index may refer to.
    fn num_samples(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// `(1/|I|)·Σ_{i∈I} ∇ℓ_i(x)` plus any deterministic (unsampled) terms.
    fn gradient_batch(&self, x: &[f64], indices: &[usize]) -> Result<Vec<f64>>;

    /// Full gradient; bit-identical to `gradient_batch` over `0..n` in order.
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn is_convex(&self) -> bool;

    /// A proven upper bound on the Lipschitz constant of `∇f`, when one is known.
    fn smoothness_bound(&self) -> Option<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Loss {
    /// `(1/n)Σ[1 − tanh(b_i⟨x, a_i⟩)] + (μ/2)‖x‖²`; nonconvex.
    TanhSvm { mu: f64 },
    /// `(1/n)Σ log(1 + exp(−b_i⟨x, a_i⟩))`.
    Logistic,
}

/// `sup_z |d²/dz² (1 − tanh z)| = 4/(3√3)`.
const TANH_CURVATURE: f64 = 0.769_800_358_919_501_2;

impl Loss {
    #[inline]
    fn sample_loss(&self, z: f64) -> f64 {
        match self {
            Loss::TanhSvm { .. } => 1.0 - z.tanh(),
            // log(1 + e^{-z}) = max(−z, 0) + log1p(e^{−|z|})
            Loss::Logistic => (-z).max(0.0) + (-z.abs()).exp().ln_1p(),
        }
    }

    /// d/dz of the per-sample loss.
    #[inline]
    fn sample_slope(&self, z: f64) -> f64 {
        match self {
            Loss::TanhSvm { .. } => {
                let sech = 1.0 / z.cosh();
                -sech * sech
            }
            Loss::Logistic => -sigmoid(-z),
        }
    }

    fn ridge(&self) -> f64 {
        match *self {
            Loss::TanhSvm { mu } => mu,
            Loss::Logistic => 0.0,
        }
    }
}

#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// One of the two classification objectives over a shared dataset.
#[derive(Debug, Clone)]
pub struct Objective {
    loss: Loss,
    data: Arc<Dataset>,
}

impl Objective {
    pub fn new(loss: Loss, data: Arc<Dataset>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if let Loss::TanhSvm { mu } = loss {
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(Error::invalid("mu", format!("must be finite and >= 0, got {mu}")));
            }
        }
        Ok(Objective { loss, data })
    }

    pub fn loss(&self) -> Loss {
        self.loss
    }

    pub fn data(&self) -> &Arc<Dataset> {
        &self.data
    }

    /// Accumulates the averaged gradient over `indices` in iteration order.
    fn accumulate(&self, x: &[f64], indices: impl ExactSizeIterator<Item = usize>) -> Vec<f64> {
        let count = indices.len() as f64;
        let mut g = vec![0.0; self.data.dim()];
        for i in indices {
            let (row, b) = self.data.sample(i);
            let z = b * row.dot(x);
            row.axpy_into(b * self.loss.sample_slope(z), &mut g);
        }
        let mu = self.loss.ridge();
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi = *gi / count + mu * xi;
        }
        g
    }
}

impl SmoothFn for Objective {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn num_samples(&self) -> usize {
        self.data.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let total: f64 = self
            .data
            .rows()
            .iter()
            .zip(self.data.labels())
            .map(|(row, &b)| self.loss.sample_loss(b * row.dot(x)))
            .sum();
        total / self.data.len() as f64 + 0.5 * self.loss.ridge() * norm_sq(x)
    }

    fn gradient_batch(&self, x: &[f64], indices: &[usize]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        if indices.is_empty() {
            return Err(Error::invalid("indices", "batch must be nonempty"));
        }
        let n = self.data.len();
        if let Some(&index) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index, n });
        }
        Ok(self.accumulate(x, indices.iter().copied()))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.accumulate(x, 0..self.data.len())
    }

    fn is_convex(&self) -> bool {
        matches!(self.loss, Loss::Logistic)
    }

    fn smoothness_bound(&self) -> Option<f64> {
        let spread = self.data.mean_sq_row_norm();
        Some(match self.loss {
            Loss::Logistic => 0.25 * spread,
            Loss::TanhSvm { mu } => TANH_CURVATURE * spread + mu,
        })
    }
}

/// `f(x) = ½xᵀAx − bᵀx + c` with symmetric `A`, treated as a single sample.
/// Used for closed-form checks.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    dim: usize,
    /// Row-major `dim × dim`.
    a: Vec<f64>,
    b: Vec<f64>,
    c: f64,
}

impl Quadratic {
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        let dim = b.len();
        check_dim(dim * dim, a.len())?;
        for i in 0..dim {
            for j in 0..i {
                if a[i * dim + j] != a[j * dim + i] {
                    return Err(Error::invalid("a", "matrix must be symmetric"));
                }
            }
        }
        Ok(Quadratic { dim, a, b, c })
    }

    /// `½‖x − center‖²`.
    pub fn isotropic(center: &[f64]) -> Self {
        let dim = center.len();
        let mut a = vec![0.0; dim * dim];
        for i in 0..dim {
            a[i * dim + i] = 1.0;
        }
        Quadratic { dim, a, b: center.to_vec(), c: 0.5 * norm_sq(center) }
    }

    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn linear(&self) -> &[f64] {
        &self.b
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.a.chunks(self.dim).map(|row| dot(row, x)).collect()
    }
}

impl SmoothFn for Quadratic {
    fn dim(&self) -> usize {
        self.dim
    }

    fn num_samples(&self) -> usize {
        1
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.apply(x)) - dot(&self.b, x) + self.c
    }

    fn gradient_batch(&self, x: &[f64], indices: &[usize]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        if indices.is_empty() {
            return Err(Error::invalid("indices", "batch must be nonempty"));
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= 1) {
            return Err(Error::IndexOutOfRange { index, n: 1 });
        }
        Ok(self.gradient(x))
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.apply(x).iter().zip(&self.b).map(|(ax, b)| ax - b).collect()
    }

    /// Convexity is assumed: callers construct positive semidefinite `A`.
    fn is_convex(&self) -> bool {
        true
    }

    fn smoothness_bound(&self) -> Option<f64> {
        None
    }
}

/// Fraction of samples with `sign⟨x, a_i⟩ = b_i`, where `sign(0) = +1`.
pub fn test_accuracy(ds: &Dataset, x: &[f64]) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_dim(ds.dim(), x.len())?;
    let correct = ds
        .rows()
        .iter()
        .zip(ds.labels())
        .filter(|(row, &b)| {
            let predicted = if row.dot(x) >= 0.0 { 1.0 } else { -1.0 };
            predicted == b
        })
        .count();
    Ok(correct as f64 / ds.len() as f64)
}
