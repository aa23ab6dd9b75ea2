//! Adaptive proximal gradient methods for composite problems `min F(x) = f(x) + h(x)`.
//!
//! `f` is smooth (possibly nonconvex) and reached through a deterministic or
//! mini-batch gradient oracle; `h` is a simple convex regularizer accessed via
//! its proximal operator. The solvers scale their step by the accumulated
//! squared norms of the gradient mapping, so no smoothness constant is needed.

pub mod error;
pub mod gradmap;
pub mod linalg;
pub mod metrics;
pub mod oracle;
pub mod problems;
pub mod prox;
pub mod solvers;

pub use error::{Error, Result};
pub use gradmap::{gradient_mapping, stationarity_metric, GradMapResult};
pub use metrics::{compute_reference, fit_loglog_slope, Reference, ReferenceOptions, TraceRecord};
pub use oracle::{BatchSchedule, GradientOracle};
pub use problems::{Dataset, Loss, Objective, Quadratic, SmoothFn, SparseRow};
pub use prox::{ExtReal, Regularizer};
pub use solvers::{
    estimate_smoothness, run, AccAdaProx, AdaProx, Algorithm, Budget, PgStepRule, ProxGradient,
    RunContext, RunOptions, Snapshot, SolverState, StepReport, Trace,
};

/// Iterates and gradients are plain dense `f64` vectors.
pub type DenseVector = Vec<f64>;
