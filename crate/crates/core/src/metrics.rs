//! Trace rows, reference optima for convex problems, and rate fitting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::GradientOracle;
use crate::problems::SmoothFn;
use crate::prox::Regularizer;
use crate::solvers::AccAdaProx;

/// One metrics row of a run. Row `k` describes the state after `k` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: u64,
    pub epochs: f64,
    pub wall_s: f64,
    /// `F` at the reported point (`x_{k+1}`, or `y_{k+1}` when accelerated).
    pub f: f64,
    /// `F` at the averaged iterate, when the method keeps one.
    pub f_avg: Option<f64>,
    /// `f − F_ref`, when a reference optimum is known.
    pub subopt: Option<f64>,
    /// `‖𝒢₁‖` at the reported point, with the full gradient.
    pub gradmap: f64,
    /// Running mean of `gradmap²` over every row so far, row 0 included.
    pub avg_sq_gradmap: f64,
    /// `S` in effect for the next step.
    pub s: Option<f64>,
    /// Step size in effect for the next step.
    pub step: f64,
    /// Batch size of the step that produced this row; 0 on row 0.
    pub batch: usize,
    pub test_acc: Option<f64>,
}

impl TraceRecord {
    /// `F(x̄_t) − F_ref` for methods that report an averaged iterate.
    pub fn subopt_avg(&self, reference: &Reference) -> Option<f64> {
        self.f_avg.map(|f| f - reference.f_ref)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub f_ref: f64,
    pub x_ref: Vec<f64>,
    /// Empirical stall certificate: the largest best-so-far decrease over the
    /// last decade of iterations among the starts.
    pub tol_ref: f64,
}

impl Reference {
    /// Whether a suboptimality value is below the certified slack.
    pub fn at_floor(&self, subopt: f64) -> bool {
        subopt < self.tol_ref
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceOptions {
    pub budget: u64,
    pub gamma: f64,
    pub eta: f64,
    pub seed: u64,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions { budget: 100_000, gamma: 1.0, eta: 10.0, seed: 0 }
    }
}

fn objective(problem: &dyn SmoothFn, h: &Regularizer, x: &[f64]) -> Result<f64> {
    Ok(h.value(x)?.finite().map_or(f64::INFINITY, |hv| problem.value(x) + hv))
}

/// Approximates `F* = min f + h` for convex `f` by running the deterministic
/// accelerated method from the origin and two seeded random points in
/// `dom h`, keeping the best objective seen at any iterate.
pub fn compute_reference(
    problem: &dyn SmoothFn,
    h: &Regularizer,
    opts: &ReferenceOptions,
) -> Result<Reference> {
    if !problem.is_convex() {
        return Err(Error::Nonconvex);
    }
    if opts.budget < 1000 {
        return Err(Error::invalid("budget", format!("reference solve needs >= 1000 iterations, got {}", opts.budget)));
    }
    let d = problem.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let reach = h.radius().map_or(1.0, |r| r.min(1.0));
    let mut starts = vec![vec![0.0; d]];
    for _ in 0..2 {
        starts.push((0..d).map(|_| reach * rng.random_range(-1.0..=1.0)).collect());
    }

    let checkpoint = opts.budget / 10;
    let mut best = (f64::INFINITY, vec![0.0; d]);
    let mut tol_ref: f64 = 0.0;
    for start in starts {
        let mut solver = AccAdaProx::new(start, opts.gamma, opts.eta, h)?;
        let mut oracle = GradientOracle::full(problem);
        let mut run_best = objective(problem, h, solver.y())?;
        let mut run_arg = solver.y().to_vec();
        let mut at_checkpoint = run_best;
        for k in 1..=opts.budget {
            solver.step(h, &mut oracle)?;
            let f = objective(problem, h, solver.y())?;
            if f < run_best {
                run_best = f;
                run_arg.copy_from_slice(solver.y());
            }
            if k == checkpoint {
                at_checkpoint = run_best;
            }
        }
        tol_ref = tol_ref.max(at_checkpoint - run_best);
        if run_best < best.0 {
            best = (run_best, run_arg);
        }
    }
    Ok(Reference { f_ref: best.0, x_ref: best.1, tol_ref })
}

/// Least-squares slope of `log(value)` against `log(t)` over the last
/// `window` fraction of the usable points. Points with `t ≤ 0` or values at
/// or below `1e−13 · max value` are not usable.
pub fn fit_loglog_slope(series: &[(f64, f64)], window: f64) -> Result<f64> {
    const MIN_POINTS: usize = 10;
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::invalid("window", format!("must lie in (0, 1], got {window}")));
    }
    let scale = series
        .iter()
        .map(|&(_, v)| v)
        .filter(|v| v.is_finite())
        .fold(0.0_f64, f64::max);
    let floor = 1e-13 * scale;
    let usable: Vec<(f64, f64)> = series
        .iter()
        .filter(|&&(t, v)| t > 0.0 && t.is_finite() && v.is_finite() && v > floor)
        .map(|&(t, v)| (t.ln(), v.ln()))
        .collect();
    let take = (window * usable.len() as f64).ceil() as usize;
    let points = &usable[usable.len() - take..];
    if points.len() < MIN_POINTS {
        return Err(Error::TooFewPoints { needed: MIN_POINTS, found: points.len() });
    }
    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(sxy, sxx), &(x, y)| {
        (sxy + (x - mean_x) * (y - mean_y), sxx + (x - mean_x) * (x - mean_x))
    });
    if sxx == 0.0 {
        return Err(Error::invalid("series", "all usable points share one t"));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Quadratic;

    fn power_law(p: i32) -> Vec<(f64, f64)> {
        (1..=1000).map(|t| (t as f64, (t as f64).powi(-p))).collect()
    }

    #[test]
    fn exact_power_laws() {
        assert!((fit_loglog_slope(&power_law(1), 0.5).unwrap() + 1.0).abs() < 1e-6);
        assert!((fit_loglog_slope(&power_law(2), 0.5).unwrap() + 2.0).abs() < 1e-6);
        let constant: Vec<_> = (1..=1000).map(|t| (t as f64, 3.0)).collect();
        assert!(fit_loglog_slope(&constant, 0.5).unwrap().abs() < 1e-6);
    }

    #[test]
    fn too_few_points() {
        let short: Vec<_> = (1..=15).map(|t| (t as f64, 1.0 / t as f64)).collect();
        assert!(matches!(fit_loglog_slope(&short, 0.5), Err(Error::TooFewPoints { .. })));
        let mut floored = power_law(1);
        for p in floored.iter_mut().skip(5) {
            p.1 = 0.0;
        }
        assert!(fit_loglog_slope(&floored, 1.0).is_err());
    }

    #[test]
    fn isotropic_reference() {
        let c = [1.5, -0.5, 2.0];
        let f = Quadratic::isotropic(&c);
        let opts = ReferenceOptions { budget: 1000, eta: 1.0, ..Default::default() };
        let r = compute_reference(&f, &Regularizer::Zero, &opts).unwrap();
        assert!(r.f_ref.abs() < 1e-8, "{}", r.f_ref);
        for (a, b) in r.x_ref.iter().zip(&c) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(r.tol_ref >= 0.0);
    }

    #[test]
    fn scalar_lasso_reference() {
        // F(x) = ½(x − 2)² + |x| is minimized at x* = 1 with F* = 1.5
        let f = Quadratic::isotropic(&[2.0]);
        let h = Regularizer::l1(1.0).unwrap();
        let r = compute_reference(&f, &h, &ReferenceOptions { budget: 1000, ..Default::default() }).unwrap();
        assert!((r.f_ref - 1.5).abs() < 1e-6, "{}", r.f_ref);
        assert!((r.x_ref[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rejects_nonconvex_and_short_budgets() {
        use std::sync::Arc;
        use crate::problems::{Loss, Objective, SyntheticSpec};
        let ds = SyntheticSpec { n: 10, d: 2, margin: 0.0, flip: 0.0, seed: 1 }.generate().unwrap();
        let svm = Objective::new(Loss::TanhSvm { mu: 0.0 }, Arc::new(ds)).unwrap();
        let opts = ReferenceOptions::default();
        assert!(matches!(compute_reference(&svm, &Regularizer::Zero, &opts), Err(Error::Nonconvex)));
        let q = Quadratic::isotropic(&[0.0]);
        let short = ReferenceOptions { budget: 10, ..opts };
        assert!(compute_reference(&q, &Regularizer::Zero, &short).is_err());
    }
}
