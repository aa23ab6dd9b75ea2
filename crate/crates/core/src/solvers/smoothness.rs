use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dist, norm};
use crate::problems::SmoothFn;

/// Estimates the Lipschitz constant `L` of `∇f`.
///
/// Samples `‖∇f(u) − ∇f(v)‖ / ‖u − v‖` over random nearby pairs at several
/// scales and returns the larger of that maximum and the problem's analytic
/// bound, when it has one.
pub fn estimate_smoothness(problem: &dyn SmoothFn, trials: usize, seed: u64) -> Result<f64> {
    if trials < 100 {
        return Err(Error::invalid("trials", format!("need at least 100, got {trials}")));
    }
    const BASE_SCALES: [f64; 3] = [0.1, 1.0, 10.0];
    const OFFSETS: [f64; 4] = [1.0, 0.1, 0.01, 0.001];
    let d = problem.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaussian = |scale: f64, rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..d).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
    };
    let mut sampled: f64 = 0.0;
    for t in 0..trials {
        let u = gaussian(BASE_SCALES[t % 3] / (d as f64).sqrt(), &mut rng);
        let offset = gaussian(OFFSETS[t % 4] / (d as f64).sqrt(), &mut rng);
        let v: Vec<f64> = u.iter().zip(&offset).map(|(a, b)| a + b).collect();
        let gap = dist(&u, &v);
        if gap == 0.0 {
            continue;
        }
        let gu = problem.gradient(&u);
        let gv = problem.gradient(&v);
        let diff: Vec<f64> = gu.iter().zip(&gv).map(|(a, b)| a - b).collect();
        sampled = sampled.max(norm(&diff) / gap);
    }
    Ok(problem.smoothness_bound().map_or(sampled, |bound| bound.max(sampled)))
}
