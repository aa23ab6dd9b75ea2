//! Property suites run by `adaprox verify`.
//!
//! Each suite checks a batch of random instances against a known inequality
//! or identity and reports how many failed.

use std::fmt;
use std::sync::Arc;

use adaprox_core::linalg::norm_sq;
use adaprox_core::problems::SyntheticSpec;
use adaprox_core::solvers::next_alpha;
use adaprox_core::{
    gradient_mapping, AccAdaProx, BatchSchedule, GradientOracle, Loss, Objective, Regularizer, SmoothFn,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

/// Deliberate defects used to check that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Soft threshold moves away from zero: `sign(v)(|v| + τ)`.
    SignFlip,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checked: usize,
    pub failed: usize,
    /// Worst violation seen, or a short note.
    pub detail: String,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: {}/{} passed ({})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.checked - self.failed,
            self.checked,
            self.detail
        )
    }
}

struct Tally {
    name: &'static str,
    checked: usize,
    failed: usize,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, checked: 0, failed: 0, worst: f64::NEG_INFINITY }
    }

    /// Records `lhs ≤ rhs`; the excess `lhs − rhs` is tracked.
    fn le(&mut self, lhs: f64, rhs: f64) {
        self.checked += 1;
        let excess = lhs - rhs;
        if !(excess <= 0.0) {
            self.failed += 1;
        }
        if excess > self.worst || excess.is_nan() {
            self.worst = excess;
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name,
            checked: self.checked,
            failed: self.failed,
            detail: format!("max excess {:.3e}", self.worst),
        }
    }
}

fn prox_under_test(h: &Regularizer, step: f64, v: &[f64], fault: Option<Fault>) -> Vec<f64> {
    match (fault, h) {
        (Some(Fault::SignFlip), Regularizer::L1Box { lambda, radius }) => {
            let tau = step * lambda;
            v.iter().map(|&x| (x.signum() * (x.abs() + tau)).clamp(-radius, *radius)).collect()
        }
        _ => h.prox(step, v).expect("valid step"),
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `‖prox(u) − prox(v)‖ ≤ ‖u − v‖`, including pairs straddling zero.
pub fn prox_nonexpansive(trials: usize, fault: Option<Fault>) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut tally = Tally::new("prox_nonexpansive");
    for t in 0..trials {
        let h = Regularizer::l1_box(rng.random_range(0.0..2.0), rng.random_range(0.5..20.0)).expect("valid");
        let step = rng.random_range(1e-3..10.0);
        let d = rng.random_range(1..=50);
        let (u, v): (Vec<f64>, Vec<f64>) = if t % 2 == 0 {
            let mut draw = || (0..d).map(|_| rng.random_range(-30.0..30.0)).collect();
            (draw(), draw())
        } else {
            // mirrored pairs near zero, inside the threshold
            let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1e-3..1e-3)).collect();
            (v.iter().map(|x| -x).collect(), v)
        };
        let pu = prox_under_test(&h, step, &u, fault);
        let pv = prox_under_test(&h, step, &v, fault);
        tally.le(dist(&pu, &pv), dist(&u, &v) * (1.0 + 1e-12) + 1e-15);
    }
    tally.finish()
}

/// Summation bounds for `a_k ≤ C·A_{k−1}`.
pub fn summation_bounds(sequences: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut tally = Tally::new("summation_bounds");
    for s in 0..sequences {
        let c = [0.1, 1.0, 10.0][s % 3];
        let a0: f64 = rng.random_range(1e-3..10.0);
        let len = rng.random_range(1..200);
        let mut prev = a0;
        let (mut sqrt_sum, mut log_sum) = (0.0, 0.0);
        for _ in 0..len {
            let u = match rng.random_range(0..4) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random_range(0.0..=1.0),
            };
            let a = u * c * prev;
            sqrt_sum += a / prev.sqrt();
            log_sum += a / prev;
            prev += a;
        }
        let gap = prev.sqrt() - a0.sqrt();
        let slack = 1e-9 * (1.0 + sqrt_sum);
        tally.le(2.0 * gap, sqrt_sum + slack);
        tally.le(sqrt_sum, (1.0 + (1.0 + c).sqrt()) * gap + slack);
        tally.le(log_sum, (1.0 + c) * (prev / a0).ln() + 1e-9 * (1.0 + log_sum));
    }
    tally.finish()
}

/// `α_k² − α_k = α_{k−1}²` and `(k+1)/2 ≤ α_k ≤ k+1`.
pub fn alpha_recurrence(max_k: u64) -> SuiteResult {
    let mut tally = Tally::new("alpha_recurrence");
    let mut prev = 0.0;
    for k in 1..=max_k {
        let alpha = next_alpha(prev);
        tally.le((alpha * alpha - alpha - prev * prev).abs() / (alpha * alpha), 1e-10);
        let k = k as f64;
        tally.le((k + 1.0) / 2.0, alpha);
        tally.le(alpha, k + 1.0);
        prev = alpha;
    }
    tally.finish()
}

fn desk_logistic() -> Objective {
    let ds = SyntheticSpec { n: 200, d: 20, margin: 0.1, flip: 0.0, seed: 1 }.generate().expect("valid spec");
    Objective::new(Loss::Logistic, Arc::new(ds)).expect("non-empty data")
}

fn small_svm() -> Objective {
    let ds = SyntheticSpec { n: 120, d: 15, margin: 0.0, flip: 0.1, seed: 6 }.generate().expect("valid spec");
    Objective::new(Loss::TanhSvm { mu: 1e-3 }, Arc::new(ds)).expect("non-empty data")
}

/// `y_{k+1} = θ_k z_{k+1} + (1 − θ_k) y_k` along an accelerated run.
pub fn y_rule(steps: usize) -> SuiteResult {
    let f = desk_logistic();
    let h = Regularizer::l1_box(1e-3, 50.0).expect("valid");
    let mut solver = AccAdaProx::new(vec![0.0; f.dim()], 1.0, 10.0, &h).expect("valid");
    let mut oracle = GradientOracle::full(&f);
    let mut tally = Tally::new("y_rule");
    for _ in 0..steps {
        let y_prev = solver.y().to_vec();
        let report = solver.step(&h, &mut oracle).expect("step");
        let theta = report.theta.expect("accelerated steps report θ");
        tally.le(theta, 1.0);
        for ((y, z), yp) in solver.y().iter().zip(solver.z()).zip(&y_prev) {
            let expected = theta * z + (1.0 - theta) * yp;
            tally.le((y - expected).abs(), 1e-10 * (1.0 + expected.abs()));
        }
    }
    tally.finish()
}

/// `‖𝒢_η(x) − 𝒢̃_η(x)‖ ≤ ‖∇f(x) − g‖` for single-sample gradients.
pub fn mapping_difference(trials: usize) -> SuiteResult {
    let f = small_svm();
    let h = Regularizer::l1_box(0.05, 0.3).expect("valid");
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let mut oracle = GradientOracle::new(&f, BatchSchedule::Constant(1), 1).expect("valid");
    let mut tally = Tally::new("mapping_difference");
    for k in 1..=trials as u64 {
        let x: Vec<f64> = (0..f.dim()).map(|_| rng.random_range(-0.3..0.3)).collect();
        let eta = rng.random_range(0.01..10.0);
        let (g, _) = oracle.query(&x, k).expect("query");
        let exact = gradient_mapping(&x, &f.gradient(&x), &h, eta).expect("valid");
        let noisy = gradient_mapping(&x, &g, &h, eta).expect("valid");
        tally.le(dist(&exact.mapping, &noisy.mapping), norm_sq(&oracle.noise(&x, &g)).sqrt() + 1e-12);
    }
    tally.finish()
}

/// Analytic gradients against central differences, relative error ≤ 1e-5.
pub fn finite_difference(points: usize) -> SuiteResult {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut tally = Tally::new("finite_difference");
    for p in 0..points {
        let ds = SyntheticSpec { n: 25, d: 6, margin: 0.0, flip: 0.2, seed: p as u64 }.generate().expect("valid");
        let loss = if p % 2 == 0 { Loss::Logistic } else { Loss::TanhSvm { mu: rng.random_range(0.0..0.1) } };
        let f = Objective::new(loss, Arc::new(ds)).expect("non-empty");
        let x: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
        let g = f.gradient(&x);
        for i in 0..x.len() {
            let step = 1e-5;
            let (mut plus, mut minus) = (x.clone(), x.clone());
            plus[i] += step;
            minus[i] -= step;
            let fd = (f.value(&plus) - f.value(&minus)) / (2.0 * step);
            let scale = g[i].abs().max(fd.abs()).max(1e-3);
            tally.le((g[i] - fd).abs() / scale, 1e-5);
        }
    }
    tally.finish()
}

/// Exact `(1/n)Σ‖∇f_i(x) − ∇f(x)‖²`.
fn sigma_sq(f: &Objective, x: &[f64]) -> f64 {
    let full = f.gradient(x);
    let n = f.num_samples();
    (0..n)
        .map(|i| {
            let g = f.gradient_batch(x, &[i]).expect("valid index");
            dist(&g, &full).powi(2)
        })
        .sum::<f64>()
        / n as f64
}

/// Mini-batch mean within 5 standard errors of `∇f`, and `E‖δ‖²` within
/// 30% of `σ²/b`.
pub fn oracle_moments(draws: usize) -> SuiteResult {
    let ds = SyntheticSpec { n: 40, d: 5, margin: 0.0, flip: 0.2, seed: 11 }.generate().expect("valid");
    let f = Objective::new(Loss::TanhSvm { mu: 1e-3 }, Arc::new(ds)).expect("non-empty");
    let x = [0.5, -0.3, 0.8, 0.1, -0.6];
    let full = f.gradient(&x);
    let sigma_sq = sigma_sq(&f, &x);
    let mut tally = Tally::new("oracle_moments");
    for b in [1usize, 2, 4, 8] {
        let mut oracle = GradientOracle::new(&f, BatchSchedule::Constant(b), 200 + b as u64).expect("valid");
        let mut sum = [0.0; 5];
        let mut sum_sq = [0.0; 5];
        let mut noise = 0.0;
        for k in 1..=draws as u64 {
            let (g, _) = oracle.query(&x, k).expect("query");
            for j in 0..5 {
                sum[j] += g[j];
                sum_sq[j] += g[j] * g[j];
            }
            noise += norm_sq(&oracle.noise(&x, &g));
        }
        let m = draws as f64;
        for j in 0..5 {
            let mean = sum[j] / m;
            let se = ((sum_sq[j] / m - mean * mean) / m).sqrt();
            tally.le((mean - full[j]).abs(), 5.0 * se);
        }
        let ratio = (noise / m) / (sigma_sq / b as f64);
        tally.le((ratio - 1.0).abs(), 0.3);
    }
    tally.finish()
}

pub fn run_suites(level: Level, fault: Option<Fault>) -> Vec<SuiteResult> {
    let mut results = vec![
        prox_nonexpansive(1000, fault),
        summation_bounds(1000),
        alpha_recurrence(10_000),
        y_rule(500),
        mapping_difference(1000),
        finite_difference(40),
    ];
    if level == Level::Full {
        results.push(oracle_moments(10_000));
    }
    results
}
