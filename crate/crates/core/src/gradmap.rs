//! Gradient mapping `𝒢_η(x) = (x − prox_{ηh}(x − η·g)) / η`.
//!
//! With `g = ∇f(x)` this is the composite stationarity measure; with a
//! stochastic `g` it is the stochastic mapping the adaptive step accumulates.

use crate::error::{Error, Result};
use crate::linalg::{check_dim, check_finite, forward_step, norm};
use crate::problems::SmoothFn;
use crate::prox::Regularizer;

#[derive(Debug, Clone, PartialEq)]
pub struct GradMapResult {
    /// `prox_{ηh}(x − η·g)`.
    pub mapped_point: Vec<f64>,
    pub mapping: Vec<f64>,
    pub norm: f64,
    pub eta: f64,
}

pub fn gradient_mapping(x: &[f64], g: &[f64], h: &Regularizer, eta: f64) -> Result<GradMapResult> {
    check_dim(x.len(), g.len())?;
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid("eta", format!("must be finite and > 0, got {eta}")));
    }
    check_finite(x, "gradient mapping point")?;
    check_finite(g, "gradient")?;
    let mapped_point = h.prox(eta, &forward_step(x, eta, g))?;
    let mapping: Vec<f64> = x.iter().zip(&mapped_point).map(|(xi, pi)| (xi - pi) / eta).collect();
    let norm = norm(&mapping);
    Ok(GradMapResult { mapped_point, mapping, norm, eta })
}

/// `‖𝒢₁(x)‖` with the full gradient.
pub fn stationarity_metric(x: &[f64], problem: &dyn SmoothFn, h: &Regularizer) -> Result<f64> {
    check_dim(problem.dim(), x.len())?;
    Ok(gradient_mapping(x, &problem.gradient(x), h, 1.0)?.norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prox::{prox_oracle_1d, Grid};
    use crate::problems::Quadratic;

    #[test]
    fn zero_regularizer_returns_gradient() {
        for eta in [0.5, 1.0, 3.0] {
            let r = gradient_mapping(&[1.0, 2.0], &[0.25, -4.0], &Regularizer::Zero, eta).unwrap();
            assert_eq!(r.mapping, vec![0.25, -4.0]);
        }
        let f = Quadratic::isotropic(&[0.0, 0.0]);
        let x = [3.0, 4.0];
        let r = gradient_mapping(&x, &f.gradient(&x), &Regularizer::Zero, 1.0).unwrap();
        assert_eq!(r.mapping, vec![3.0, 4.0]);
        assert_eq!(r.norm, 5.0);
    }

    #[test]
    fn box_boundary_mapping() {
        let h = Regularizer::boxed(1.0).unwrap();
        let r = gradient_mapping(&[0.0, 0.0], &[-5.0, 0.0], &h, 1.0).unwrap();
        let ind = |z: f64| if z.abs() <= 1.0 { 0.0 } else { f64::INFINITY };
        let oracle = prox_oracle_1d(ind, 1.0, 5.0, Grid { lo: -7.0, hi: 7.0, n: 100_000 }).unwrap();
        assert!((oracle - 1.0).abs() < 1e-4);
        assert_eq!(r.mapped_point, vec![1.0, 0.0]);
        assert_eq!(r.mapping, vec![-1.0, 0.0]);
    }

    #[test]
    fn stationary_points() {
        let c = [0.3, -0.7];
        let f = Quadratic::isotropic(&c);
        assert_eq!(stationarity_metric(&c, &f, &Regularizer::Zero).unwrap(), 0.0);
        let h = Regularizer::boxed(1.0).unwrap();
        assert_eq!(stationarity_metric(&c, &f, &h).unwrap(), 0.0);
        // f(x) = x on [−1, 1] is stationary at the left boundary
        let linear = Quadratic::new(vec![0.0], vec![-1.0], 0.0).unwrap();
        assert_eq!(stationarity_metric(&[-1.0], &linear, &h).unwrap(), 0.0);
        assert!(stationarity_metric(&[0.0], &linear, &h).unwrap() > 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let h = Regularizer::Zero;
        assert!(gradient_mapping(&[1.0], &[1.0, 2.0], &h, 1.0).is_err());
        assert!(gradient_mapping(&[1.0], &[1.0], &h, 0.0).is_err());
        assert!(gradient_mapping(&[f64::NAN], &[1.0], &h, 1.0).is_err());
    }
}
