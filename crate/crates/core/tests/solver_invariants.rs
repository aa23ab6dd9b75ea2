use std::sync::Arc;

use adaprox_core::linalg::{dist, norm_sq};
use adaprox_core::problems::SyntheticSpec;
use adaprox_core::solvers::next_alpha;
use adaprox_core::{
    estimate_smoothness, run, AccAdaProx, AdaProx, Algorithm, BatchSchedule, Budget, GradientOracle, Loss,
    Objective, PgStepRule, ProxGradient, Quadratic, Regularizer, RunContext, RunOptions, SmoothFn,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_quadratic(d: usize, seed: u64) -> Quadratic {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    // A = MᵀM/d + 0.1·I
    let mut a = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let s: f64 = (0..d).map(|k| m[k * d + i] * m[k * d + j]).sum();
            a[i * d + j] = s / d as f64 + if i == j { 0.1 } else { 0.0 };
        }
    }
    let b = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    Quadratic::new(a, b, 0.0).unwrap()
}

fn desk_logistic() -> Objective {
    let ds = SyntheticSpec { n: 200, d: 20, margin: 0.1, flip: 0.0, seed: 1 }.generate().unwrap();
    Objective::new(Loss::Logistic, Arc::new(ds)).unwrap()
}

fn small_svm() -> Objective {
    let ds = SyntheticSpec { n: 300, d: 15, margin: 0.0, flip: 0.15, seed: 3 }.generate().unwrap();
    Objective::new(Loss::TanhSvm { mu: 1e-3 }, Arc::new(ds)).unwrap()
}

#[test]
fn reduces_to_gradient_descent_without_regularizer() {
    let d = 8;
    let f = random_quadratic(d, 17);
    let (gamma, eta) = (1.0, 2.0);
    let mut solver = AdaProx::new(vec![0.0; d], gamma, eta, &Regularizer::Zero).unwrap();
    let mut oracle = GradientOracle::full(&f);

    let mut x = vec![0.0; d];
    let mut s_sq = gamma * gamma;
    for _ in 0..100 {
        let g = f.gradient(&x);
        let step = eta / s_sq.sqrt();
        let next: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - step * gi).collect();
        let moved_sq: f64 = next.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum();
        s_sq *= 1.0 + moved_sq / (eta * eta);
        x = next;

        solver.step(&Regularizer::Zero, &mut oracle).unwrap();
        for (a, b) in solver.iterate().iter().zip(&x) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn accelerated_z_update_without_regularizer() {
    let d = 5;
    let f = random_quadratic(d, 4);
    let eta = 3.0;
    let mut solver = AccAdaProx::new(vec![0.0; d], 1.0, eta, &Regularizer::Zero).unwrap();
    let mut oracle = GradientOracle::full(&f);
    for _ in 0..50 {
        let alpha = next_alpha(solver.alpha_prev());
        let theta = 1.0 / alpha;
        let x: Vec<f64> = solver.y().iter().zip(solver.z()).map(|(y, z)| (1.0 - theta) * y + theta * z).collect();
        let g = f.gradient(&x);
        let scale = eta * alpha / solver.s();
        let expected: Vec<f64> = solver.z().iter().zip(&g).map(|(z, gi)| z - scale * gi).collect();
        solver.step(&Regularizer::Zero, &mut oracle).unwrap();
        for (a, b) in solver.z().iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn s_squared_identity_and_monotone_steps() {
    let f = small_svm();
    let h = Regularizer::l1_box(1e-3, 50.0).unwrap();
    let (gamma, eta) = (0.7, 5.0);
    for schedule in [BatchSchedule::Full, BatchSchedule::Constant(4)] {
        let mut solver = AdaProx::new(vec![0.0; 15], gamma, eta, &h).unwrap();
        let mut oracle = GradientOracle::new(&f, schedule, 2).unwrap();
        let mut product = gamma * gamma;
        let mut prev_step = f64::INFINITY;
        for _ in 0..300 {
            let report = solver.step(&h, &mut oracle).unwrap();
            assert!(report.step_size <= prev_step);
            prev_step = report.step_size;
            product *= 1.0 + (report.move_norm / eta).powi(2);
            assert!((solver.s_sq() - product).abs() <= 1e-8 * product);
            // ‖𝒢̃_k‖ = ‖x_{k+1} − x_k‖ / η_k
            assert!((report.map_norm * report.step_size - report.move_norm).abs() <= 1e-12);
        }
    }
}

#[test]
fn accelerated_steps_are_monotone() {
    let f = small_svm();
    let h = Regularizer::l1_box(1e-3, 50.0).unwrap();
    let mut solver = AccAdaProx::new(vec![0.0; 15], 1.0, 10.0, &h).unwrap();
    let mut oracle = GradientOracle::new(&f, BatchSchedule::Constant(2), 5).unwrap();
    let mut prev = f64::INFINITY;
    for _ in 0..300 {
        let report = solver.step(&h, &mut oracle).unwrap();
        assert!(report.step_size <= prev);
        prev = report.step_size;
    }
}

#[test]
fn alpha_recurrence_and_bounds() {
    let mut prev = 0.0;
    for k in 1..=10_000u64 {
        let alpha = next_alpha(prev);
        let rel = (alpha * alpha - alpha - prev * prev).abs() / (alpha * alpha);
        assert!(rel <= 1e-10, "k={k}: rel {rel}");
        let k = k as f64;
        assert!((k + 1.0) / 2.0 <= alpha && alpha <= k + 1.0, "k={k}: {alpha}");
        prev = alpha;
    }
}

#[test]
fn y_interpolation_along_a_run() {
    let f = desk_logistic();
    let h = Regularizer::l1_box(1e-3, 50.0).unwrap();
    let mut solver = AccAdaProx::new(vec![0.0; 20], 1.0, 10.0, &h).unwrap();
    let mut oracle = GradientOracle::full(&f);
    let mut weights = 0.0;
    for k in 1..=500 {
        let y_prev = solver.y().to_vec();
        weights += next_alpha(solver.alpha_prev());
        let report = solver.step(&h, &mut oracle).unwrap();
        let theta = report.theta.unwrap();
        if k == 1 {
            assert_eq!(theta, 1.0);
            assert_eq!(solver.y(), solver.z());
        }
        // y_{k+1} = θ_k z_{k+1} + (1 − θ_k) y_k
        for ((y, z), yp) in solver.y().iter().zip(solver.z()).zip(&y_prev) {
            let expected = theta * z + (1.0 - theta) * yp;
            assert!((y - expected).abs() <= 1e-10 * (1.0 + expected.abs()));
        }
        assert_eq!(solver.weight_total(), weights);
    }
}

#[test]
fn descent_tail_once_s_is_large() {
    let f = small_svm();
    let h = Regularizer::l1_box(1e-3, 50.0).unwrap();
    let l_hat = estimate_smoothness(&f, 200, 0).unwrap();
    let eta = 1.0;
    let ctx = RunContext::new(&f, h);
    let trace = run(ctx, &RunOptions::new(Algorithm::AdaProx { gamma: 1.0, eta }, Budget::Iterations(2000))).unwrap();
    let mut checked = 0;
    for (k, step) in trace.steps.iter().enumerate() {
        if step.s.unwrap() > l_hat * eta / 2.0 {
            let (before, after) = (trace.records[k].f, trace.records[k + 1].f);
            assert!(after <= before + 1e-9 * (1.0 + before.abs()), "k={}: {before} -> {after}", k + 1);
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn averaged_iterate_starts_after_first_step() {
    let f = random_quadratic(3, 2);
    let h = Regularizer::Zero;
    let mut solver = AdaProx::new(vec![0.0; 3], 1.0, 1.0, &h).unwrap();
    let mut oracle = GradientOracle::full(&f);
    assert!(solver.averaged_iterate().is_none());
    let mut sum = [0.0; 3];
    for t in 1..=5 {
        solver.step(&h, &mut oracle).unwrap();
        for (s, x) in sum.iter_mut().zip(solver.iterate()) {
            *s += x;
        }
        let expected: Vec<f64> = sum.iter().map(|s| s / t as f64).collect();
        assert!(dist(&solver.averaged_iterate().unwrap(), &expected) < 1e-15);
    }
}

#[test]
fn pg_examples() {
    let c = [1.0, -2.0, 0.5];
    let f = Quadratic::isotropic(&c);
    let mut pg = ProxGradient::new(vec![10.0, 10.0, 10.0], PgStepRule::Constant(1.0), &Regularizer::Zero).unwrap();
    pg.step(&Regularizer::Zero, &mut GradientOracle::full(&f)).unwrap();
    assert_eq!(pg.iterate(), &c);

    let h = Regularizer::boxed(0.5).unwrap();
    let mut pg = ProxGradient::new(vec![0.0; 3], PgStepRule::Constant(1.0), &h).unwrap();
    pg.step(&h, &mut GradientOracle::full(&f)).unwrap();
    assert_eq!(pg.iterate(), &[0.5, -0.5, 0.5]);

    assert!(ProxGradient::new(vec![0.0], PgStepRule::Constant(0.0), &h).is_err());
    assert_eq!(PgStepRule::InvSqrt(2.0).step(4), 1.0);
}

#[test]
fn initial_point_must_be_in_domain() {
    let h = Regularizer::boxed(1.0).unwrap();
    assert!(AdaProx::new(vec![2.0], 1.0, 1.0, &h).is_err());
    assert!(AccAdaProx::new(vec![0.0], 0.0, 1.0, &h).is_err());
    assert!(AdaProx::new(vec![0.0], 1.0, f64::NAN, &h).is_err());
}

#[test]
fn stochastic_move_is_bounded_by_gradient_noise() {
    // ‖𝒢_η(x) − 𝒢̃_η(x)‖ ≤ ‖∇f(x) − g‖
    let f = small_svm();
    let h = Regularizer::l1_box(0.05, 0.3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut oracle = GradientOracle::new(&f, BatchSchedule::Constant(1), 1).unwrap();
    for k in 1..=1000 {
        let x: Vec<f64> = (0..15).map(|_| rng.random_range(-0.3..0.3)).collect();
        let eta = rng.random_range(0.01..10.0);
        let (g, _) = oracle.query(&x, k).unwrap();
        let exact = adaprox_core::gradient_mapping(&x, &f.gradient(&x), &h, eta).unwrap();
        let noisy = adaprox_core::gradient_mapping(&x, &g, &h, eta).unwrap();
        let gap = dist(&exact.mapping, &noisy.mapping);
        assert!(gap <= norm_sq(&oracle.noise(&x, &g)).sqrt() + 1e-12);
    }
}
