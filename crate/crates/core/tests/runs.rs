use std::sync::Arc;

use adaprox_core::problems::SyntheticSpec;
use adaprox_core::solvers::resume;
use adaprox_core::{
    compute_reference, estimate_smoothness, fit_loglog_slope, run, Algorithm, BatchSchedule, Budget, Dataset, Loss,
    Objective, PgStepRule, Quadratic, ReferenceOptions, Regularizer, RunContext, RunOptions, SmoothFn, Snapshot,
    SparseRow,
};

fn desk_logistic() -> Objective {
    let ds = SyntheticSpec { n: 200, d: 20, margin: 0.1, flip: 0.0, seed: 1 }.generate().unwrap();
    Objective::new(Loss::Logistic, Arc::new(ds)).unwrap()
}

fn small_svm() -> Objective {
    let ds = SyntheticSpec { n: 120, d: 8, margin: 0.0, flip: 0.1, seed: 6 }.generate().unwrap();
    Objective::new(Loss::TanhSvm { mu: 1e-3 }, Arc::new(ds)).unwrap()
}

fn h() -> Regularizer {
    Regularizer::l1_box(1e-3, 50.0).unwrap()
}

fn all_algorithms() -> [Algorithm; 3] {
    [
        Algorithm::AdaProx { gamma: 1.0, eta: 10.0 },
        Algorithm::AccAdaProx { gamma: 1.0, eta: 10.0 },
        Algorithm::Pg { rule: PgStepRule::Constant(1.0) },
    ]
}

#[test]
fn zero_budget_keeps_only_the_initial_row() {
    let f = small_svm();
    for algorithm in all_algorithms() {
        let trace = run(RunContext::new(&f, h()), &RunOptions::new(algorithm, Budget::Iterations(0))).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert!(trace.steps.is_empty());
        let row = &trace.records[0];
        assert_eq!((row.k, row.epochs, row.batch), (0, 0.0, 0));
        assert_eq!(row.f, f.value(&[0.0; 8]));
    }
}

#[test]
fn runs_are_deterministic() {
    let f = small_svm();
    for algorithm in all_algorithms() {
        let mut opts = RunOptions::new(algorithm, Budget::Epochs(3.0));
        opts.schedule = BatchSchedule::Constant(5);
        opts.seed = 12;
        let a = run(RunContext::new(&f, h()), &opts).unwrap();
        let b = run(RunContext::new(&f, h()), &opts).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.snapshot, b.snapshot);
    }
}

#[test]
fn snapshot_json_round_trips_bitwise() {
    let f = small_svm();
    for algorithm in all_algorithms() {
        let mut opts = RunOptions::new(algorithm, Budget::Iterations(37));
        opts.schedule = BatchSchedule::SqrtGrowth(1.5);
        opts.seed = 3;
        let trace = run(RunContext::new(&f, h()), &opts).unwrap();
        let json = trace.snapshot.to_json();
        let back = Snapshot::from_json(&json).unwrap();
        assert_eq!(back, trace.snapshot);
        assert_eq!(back.to_json(), json);
    }
    assert!(Snapshot::from_json("{}").is_err());
}

#[test]
fn resume_continues_exactly() {
    let f = small_svm();
    for algorithm in all_algorithms() {
        let mut full = RunOptions::new(algorithm, Budget::Iterations(100));
        full.schedule = BatchSchedule::Constant(3);
        full.seed = 21;
        full.metric_cadence = 10;
        let mut half = full.clone();
        half.budget = Budget::Iterations(50);

        let whole = run(RunContext::new(&f, h()), &full).unwrap();
        let first = run(RunContext::new(&f, h()), &half).unwrap();
        let snapshot = Snapshot::from_json(&first.snapshot.to_json()).unwrap();
        let second = resume(RunContext::new(&f, h()), &full, snapshot).unwrap();

        let mut stitched = first.records.clone();
        stitched.extend(second.records);
        assert_eq!(stitched, whole.records);
        assert_eq!(second.snapshot, whole.snapshot);
    }
}

#[test]
fn cadence_controls_row_count() {
    let f = small_svm();
    for (budget, cadence) in [(100u64, 10u64), (95, 10), (7, 3), (5, 1)] {
        let mut opts = RunOptions::new(Algorithm::AdaProx { gamma: 1.0, eta: 1.0 }, Budget::Iterations(budget));
        opts.metric_cadence = cadence;
        let trace = run(RunContext::new(&f, h()), &opts).unwrap();
        assert_eq!(trace.records.len() as u64, 1 + budget.div_ceil(cadence));
        assert_eq!(trace.steps.len() as u64, budget);
        assert_eq!(trace.records.last().unwrap().k, budget);
    }
}

#[test]
fn epoch_budget_counts_gradient_evaluations() {
    let f = small_svm();
    let mut opts = RunOptions::new(Algorithm::AdaProx { gamma: 1.0, eta: 1.0 }, Budget::Epochs(2.5));
    opts.schedule = BatchSchedule::Constant(7);
    let trace = run(RunContext::new(&f, h()), &opts).unwrap();
    // ⌈2.5·120 / 7⌉ steps of 7 samples
    assert_eq!(trace.steps.len(), 43);
    assert!(trace.records.last().unwrap().epochs >= 2.5);
}

#[test]
fn invalid_options_are_rejected() {
    let f = small_svm();
    let ctx = RunContext::new(&f, h());
    let mut opts = RunOptions::new(Algorithm::AdaProx { gamma: 1.0, eta: 1.0 }, Budget::Epochs(0.0));
    assert!(run(ctx, &opts).is_err());
    opts.budget = Budget::Iterations(1);
    opts.metric_cadence = 0;
    assert!(run(ctx, &opts).is_err());
    opts.metric_cadence = 1;
    opts.x0 = Some(vec![0.0; 3]);
    assert!(run(ctx, &opts).is_err());
    opts.x0 = Some(vec![60.0; 8]);
    assert!(run(ctx, &opts).is_err());
}

#[test]
fn averaged_objective_improves_on_convex_problem() {
    let f = desk_logistic();
    let trace = run(
        RunContext::new(&f, h()),
        &RunOptions::new(Algorithm::AdaProx { gamma: 1.0, eta: 1.0 }, Budget::Iterations(500)),
    )
    .unwrap();
    let initial = trace.records[0].f;
    assert!(trace.records[0].f_avg.is_none());
    assert!(trace.records.last().unwrap().f_avg.unwrap() < initial);
}

#[test]
fn convex_runs_stay_above_reference() {
    let f = desk_logistic();
    let reference = compute_reference(&f, &h(), &ReferenceOptions { budget: 20_000, ..Default::default() }).unwrap();
    let mut ctx = RunContext::new(&f, h());
    ctx.reference = Some(&reference);
    for algorithm in [Algorithm::AdaProx { gamma: 1.0, eta: 10.0 }, Algorithm::AccAdaProx { gamma: 1.0, eta: 10.0 }] {
        let trace = run(ctx, &RunOptions::new(algorithm, Budget::Iterations(2000))).unwrap();
        for row in &trace.records {
            assert!(row.subopt.unwrap() >= -reference.tol_ref - 1e-12, "{:?}", row.subopt);
        }
        assert!(trace.diagnostics.max_dist_to_reference.unwrap() > 0.0);
    }
}

#[test]
fn smoothness_estimates() {
    let q = Quadratic::isotropic(&[0.0; 6]);
    let l = estimate_smoothness(&q, 100, 0).unwrap();
    assert!((0.999..=1.001).contains(&l), "{l}");

    let f = desk_logistic();
    assert!(estimate_smoothness(&f, 300, 1).unwrap() <= 0.25 + 1e-6);
    assert_eq!(f.smoothness_bound(), Some(0.25 * f.data().mean_sq_row_norm()));

    let svm = small_svm();
    assert!(estimate_smoothness(&svm, 100, 2).unwrap() >= 1e-3);
    assert!(estimate_smoothness(&svm, 99, 2).is_err());
}

fn toy() -> Objective {
    let rows = [
        [1.0, 0.5, -0.2],
        [-0.3, 1.0, 0.8],
        [0.7, -0.6, 0.1],
        [0.2, 0.3, -1.0],
        [-0.9, -0.4, 0.5],
    ];
    let labels = vec![1.0, -1.0, -1.0, 1.0, 1.0];
    let rows = rows.iter().map(|r| SparseRow::from_dense(r)).collect();
    Objective::new(Loss::Logistic, Arc::new(Dataset::new(rows, labels, 3).unwrap())).unwrap()
}

fn grid_minimum(f: &Objective, h: &Regularizer, center: [f64; 3], half_width: f64, spacing: f64) -> (f64, [f64; 3]) {
    let radius = h.radius().unwrap();
    let steps = (2.0 * half_width / spacing).round() as i64;
    let axis = |c: f64| {
        (0..=steps)
            .map(move |i| c - half_width + spacing * i as f64)
            .filter(move |z| z.abs() <= radius + 1e-12)
            .map(move |z| z.clamp(-radius, radius))
    };
    let mut best = (f64::INFINITY, center);
    for a in axis(center[0]) {
        for b in axis(center[1]) {
            for c in axis(center[2]) {
                let x = [a, b, c];
                let value = f.value(&x) + h.value(&x).unwrap().finite().unwrap();
                if value < best.0 {
                    best = (value, x);
                }
            }
        }
    }
    best
}

#[test]
fn toy_reference_matches_grid_search() {
    let f = toy();
    let h = Regularizer::l1_box(0.05, 1.0).unwrap();
    let reference = compute_reference(&f, &h, &ReferenceOptions { budget: 20_000, ..Default::default() }).unwrap();
    let (_, coarse) = grid_minimum(&f, &h, [0.0; 3], 1.0, 0.02);
    let (fine, _) = grid_minimum(&f, &h, coarse, 0.04, 1e-3);
    assert!((reference.f_ref - fine).abs() < 1e-3, "{} vs {fine}", reference.f_ref);
    assert!(reference.f_ref <= fine + 1e-9);
}

#[test]
fn slope_is_scale_invariant() {
    let series: Vec<(f64, f64)> = (1..=500).map(|t| (t as f64, 3.0 / (t as f64).powf(1.3) + 1e-4)).collect();
    let base = fit_loglog_slope(&series, 0.5).unwrap();
    for c in [1e-6, 0.5, 7.0, 1e8] {
        let scaled: Vec<(f64, f64)> = series.iter().map(|&(t, v)| (t, c * v)).collect();
        assert!((fit_loglog_slope(&scaled, 0.5).unwrap() - base).abs() < 1e-9);
    }
}
