use serde::{Deserialize, Serialize};

use super::{initial_point, StepReport};
use crate::error::{Error, Result};
use crate::linalg::{dist, forward_step};
use crate::oracle::GradientOracle;
use crate::prox::Regularizer;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum PgStepRule {
    Constant(f64),
    /// `α₀/√k`.
    InvSqrt(f64),
}

impl PgStepRule {
    pub fn validate(&self) -> Result<()> {
        let (PgStepRule::Constant(a) | PgStepRule::InvSqrt(a)) = *self;
        if a.is_finite() && a > 0.0 {
            Ok(())
        } else {
            Err(Error::invalid("pg_step", format!("step must be finite and > 0, got {a}")))
        }
    }

    pub fn step(&self, k: u64) -> f64 {
        match *self {
            PgStepRule::Constant(a) => a,
            PgStepRule::InvSqrt(a) => a / (k as f64).sqrt(),
        }
    }
}

/// Classical proximal gradient baseline `x_{k+1} = prox_{α_k h}(x_k − α_k g_k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProxGradient {
    k: u64,
    x: Vec<f64>,
    rule: PgStepRule,
}

impl ProxGradient {
    pub fn new(x1: Vec<f64>, rule: PgStepRule, h: &Regularizer) -> Result<Self> {
        rule.validate()?;
        Ok(ProxGradient { k: 1, x: initial_point(x1, h)?, rule })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn iterate(&self) -> &[f64] {
        &self.x
    }

    pub fn rule(&self) -> PgStepRule {
        self.rule
    }

    pub fn step_size(&self) -> f64 {
        self.rule.step(self.k)
    }

    pub fn step(&mut self, h: &Regularizer, oracle: &mut GradientOracle<'_>) -> Result<StepReport> {
        let (g, batch) = oracle.query(&self.x, self.k)?;
        let alpha = self.rule.step(self.k);
        let next = h.prox(alpha, &forward_step(&self.x, alpha, &g))?;
        let moved = dist(&next, &self.x);
        self.x = next;
        let report = StepReport {
            k: self.k,
            batch,
            s: None,
            step_size: alpha,
            map_norm: moved / alpha,
            move_norm: moved,
            theta: None,
        };
        self.k += 1;
        Ok(report)
    }
}
