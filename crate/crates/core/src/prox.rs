//! Regularizers and their proximal operators.
//!
//! `prox_{s·h}(v) = argmin_z { h(z) + ‖z − v‖² / (2s) }`. Every supported `h`
//! is separable, so each operator is a componentwise closed form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::check_finite;

/// The nonsmooth part `h` of the composite objective.
///
/// Boxes are symmetric, `[−radius, radius]^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regularizer {
    Zero,
    L1 { lambda: f64 },
    /// Indicator of the box.
    Box { radius: f64 },
    /// `lambda·‖x‖₁` plus the indicator of the box.
    L1Box { lambda: f64, radius: f64 },
}

/// Value of `h`, which is `+∞` outside its domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::PosInf => None,
        }
    }

    /// `self + rhs`, absorbing into `+∞`.
    pub fn plus(self, rhs: f64) -> ExtReal {
        match self {
            ExtReal::Finite(v) => ExtReal::Finite(v + rhs),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => f.write_str("inf"),
        }
    }
}

/// `sign(v)·max(|v| − tau, 0)`; ties at `|v| = tau` give exactly zero.
#[inline]
pub fn soft_threshold(v: f64, tau: f64) -> f64 {
    let shrunk = (v.abs() - tau).max(0.0);
    if shrunk == 0.0 {
        0.0
    } else {
        shrunk.copysign(v)
    }
}

impl Regularizer {
    pub fn l1(lambda: f64) -> Result<Self> {
        let h = Regularizer::L1 { lambda };
        h.validate()?;
        Ok(h)
    }

    pub fn boxed(radius: f64) -> Result<Self> {
        let h = Regularizer::Box { radius };
        h.validate()?;
        Ok(h)
    }

    /// Alias of [`Regularizer::boxed`].
    pub fn indicator_box(radius: f64) -> Result<Self> {
        Self::boxed(radius)
    }

    pub fn l1_box(lambda: f64, radius: f64) -> Result<Self> {
        let h = Regularizer::L1Box { lambda, radius };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        let check_lambda = |lambda: f64| {
            if lambda.is_finite() && lambda >= 0.0 {
                Ok(())
            } else {
                Err(Error::invalid("lambda", format!("must be finite and >= 0, got {lambda}")))
            }
        };
        let check_radius = |radius: f64| {
            if radius.is_finite() && radius > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid("radius", format!("must be finite and > 0, got {radius}")))
            }
        };
        match *self {
            Regularizer::Zero => Ok(()),
            Regularizer::L1 { lambda } => check_lambda(lambda),
            Regularizer::Box { radius } => check_radius(radius),
            Regularizer::L1Box { lambda, radius } => {
                check_lambda(lambda)?;
                check_radius(radius)
            }
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match *self {
            Regularizer::Box { radius } | Regularizer::L1Box { radius, .. } => Some(radius),
            _ => None,
        }
    }

    fn lambda(&self) -> f64 {
        match *self {
            Regularizer::L1 { lambda } | Regularizer::L1Box { lambda, .. } => lambda,
            _ => 0.0,
        }
    }

    /// Proximal map of one coordinate.
    #[inline]
    pub fn prox_scalar(&self, step: f64, v: f64) -> f64 {
        match *self {
            Regularizer::Zero => v,
            Regularizer::L1 { lambda } => soft_threshold(v, step * lambda),
            Regularizer::Box { radius } => v.clamp(-radius, radius),
            Regularizer::L1Box { lambda, radius } => {
                soft_threshold(v, step * lambda).clamp(-radius, radius)
            }
        }
    }

    /// `h` restricted to one coordinate; `+∞` outside the box.
    pub fn scalar_value(&self, z: f64) -> f64 {
        if let Some(r) = self.radius() {
            if z.abs() > r {
                return f64::INFINITY;
            }
        }
        self.lambda() * z.abs()
    }

    /// Writes `prox_{step·h}(v)` into `out`.
    pub fn prox_into(&self, step: f64, v: &[f64], out: &mut [f64]) -> Result<()> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid("step", format!("must be finite and > 0, got {step}")));
        }
        self.validate()?;
        check_finite(v, "prox input")?;
        for (o, &vi) in out.iter_mut().zip(v) {
            *o = self.prox_scalar(step, vi);
        }
        Ok(())
    }

    pub fn prox(&self, step: f64, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; v.len()];
        self.prox_into(step, v, &mut out)?;
        Ok(out)
    }

    pub fn value(&self, x: &[f64]) -> Result<ExtReal> {
        check_finite(x, "regularizer argument")?;
        if let Some(r) = self.radius() {
            if x.iter().any(|xi| xi.abs() > r) {
                return Ok(ExtReal::PosInf);
            }
        }
        let lambda = self.lambda();
        if lambda == 0.0 {
            return Ok(ExtReal::Finite(0.0));
        }
        Ok(ExtReal::Finite(lambda * x.iter().map(|xi| xi.abs()).sum::<f64>()))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self.radius() {
            Some(r) => x.iter().all(|xi| xi.abs() <= r),
            None => true,
        }
    }
}

/// `prox_{step·h}(v)`.
pub fn prox_apply(h: &Regularizer, step: f64, v: &[f64]) -> Result<Vec<f64>> {
    h.prox(step, v)
}

pub fn h_value(h: &Regularizer, x: &[f64]) -> Result<ExtReal> {
    h.value(x)
}

/// Uniform grid `lo, lo + (hi − lo)/n, …, hi`.
#[derive(Debug, Clone, Copy)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

/// Brute-force scalar prox: minimizes `h(z) + (z − v)²/(2·step)` over `grid`,
/// then once more over a grid of the same size spanning the two cells around
/// the winner. Independent of the closed forms above.
pub fn prox_oracle_1d(h: impl Fn(f64) -> f64, step: f64, v: f64, grid: Grid) -> Result<f64> {
    if grid.n == 0 || !(grid.lo < grid.hi) || !grid.lo.is_finite() || !grid.hi.is_finite() {
        return Err(Error::EmptyGrid);
    }
    let objective = |z: f64| h(z) + (z - v) * (z - v) / (2.0 * step);
    let scan = |lo: f64, hi: f64| {
        let spacing = (hi - lo) / grid.n as f64;
        let mut best = (f64::INFINITY, lo);
        for i in 0..=grid.n {
            let z = lo + spacing * i as f64;
            let value = objective(z);
            if value < best.0 {
                best = (value, z);
            }
        }
        (best.1, spacing)
    };
    let (coarse, spacing) = scan(grid.lo, grid.hi);
    let (fine, _) = scan(coarse - spacing, coarse + spacing);
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle(h: &Regularizer, step: f64, v: f64) -> f64 {
        let reach = v.abs() + h.radius().unwrap_or(0.0) + 1.0;
        prox_oracle_1d(|z| h.scalar_value(z), step, v, Grid { lo: -reach, hi: reach, n: 100_000 })
            .unwrap()
    }

    #[test]
    fn zero_is_identity() {
        assert_eq!(Regularizer::Zero.prox(1.0, &[3.0, -4.0]).unwrap(), vec![3.0, -4.0]);
    }

    #[test]
    fn box_clamps_regardless_of_step() {
        let h = Regularizer::boxed(50.0).unwrap();
        assert_eq!(h.prox(7.0, &[60.0, -60.0, 3.0]).unwrap(), vec![50.0, -50.0, 3.0]);
    }

    #[test]
    fn l1_matches_grid_oracle() {
        let h = Regularizer::l1(1.0).unwrap();
        let v = [2.0, -0.5, 0.0];
        // frozen from the grid oracle
        let expected = [1.0, 0.0, 0.0];
        for (&vi, &e) in v.iter().zip(&expected) {
            assert!((oracle(&h, 1.0, vi) - e).abs() < 1e-4);
        }
        assert_eq!(h.prox(1.0, &v).unwrap(), expected.to_vec());
    }

    #[test]
    fn l1_box_matches_grid_oracle() {
        let h = Regularizer::l1_box(1.0, 0.8).unwrap();
        let v = [2.0, -0.5];
        let expected = [0.8, 0.0];
        for (&vi, &e) in v.iter().zip(&expected) {
            assert!((oracle(&h, 1.0, vi) - e).abs() < 1e-4);
        }
        assert_eq!(h.prox(1.0, &v).unwrap(), expected.to_vec());
    }

    #[test]
    fn soft_threshold_tie_is_zero() {
        assert_eq!(soft_threshold(0.3, 0.3), 0.0);
        assert_eq!(soft_threshold(-0.3, 0.3), 0.0);
        assert!(soft_threshold(-0.3, 0.3).is_sign_positive());
    }

    #[test]
    fn oracle_examples() {
        let grid = Grid { lo: -4.0, hi: 4.0, n: 100_000 };
        assert!((prox_oracle_1d(f64::abs, 1.0, 2.0, grid).unwrap() - 1.0).abs() < 1e-4);
        assert!((prox_oracle_1d(|_| 0.0, 1.0, -3.0, grid).unwrap() + 3.0).abs() < 1e-4);
        let ind = |z: f64| if z.abs() <= 1.0 { 0.0 } else { f64::INFINITY };
        let grid = Grid { lo: -7.0, hi: 7.0, n: 100_000 };
        assert!((prox_oracle_1d(ind, 1.0, 5.0, grid).unwrap() - 1.0).abs() < 1e-4);
        assert!(matches!(
            prox_oracle_1d(f64::abs, 1.0, 0.0, Grid { lo: 0.0, hi: 0.0, n: 10 }),
            Err(Error::EmptyGrid)
        ));
    }

    #[test]
    fn values() {
        assert_eq!(Regularizer::l1(0.001).unwrap().value(&[1.0, -1.0]).unwrap(), ExtReal::Finite(0.002));
        assert_eq!(Regularizer::boxed(50.0).unwrap().value(&[51.0, 0.0]).unwrap(), ExtReal::PosInf);
        assert_eq!(
            Regularizer::l1_box(2.0, 1.0).unwrap().value(&[0.5, -0.5]).unwrap(),
            ExtReal::Finite(2.0)
        );
        assert_eq!(Regularizer::Zero.value(&[7.0]).unwrap(), ExtReal::Finite(0.0));
    }

    #[test]
    fn rejects_bad_input() {
        let h = Regularizer::l1(1.0).unwrap();
        assert!(matches!(h.prox(1.0, &[f64::NAN]), Err(Error::NonFinite(_))));
        assert!(h.prox(0.0, &[1.0]).is_err());
        assert!(h.value(&[f64::INFINITY]).is_err());
        assert!(Regularizer::l1(-1.0).is_err());
        assert!(Regularizer::boxed(0.0).is_err());
    }

    #[test]
    fn fixed_points() {
        let h = Regularizer::l1(3.0).unwrap();
        assert_eq!(h.prox(2.0, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let b = Regularizer::boxed(2.0).unwrap();
        let inside = [2.0, -2.0, 0.5];
        assert_eq!(b.prox(0.1, &inside).unwrap(), inside.to_vec());
    }
}
