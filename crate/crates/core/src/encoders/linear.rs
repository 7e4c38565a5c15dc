use crate::error::{Error, Result};
use crate::ssat::{Lit, Var};

use super::pb::{pb_to_cnf, Encoding, PbConstraint};

pub const DEFAULT_SCALE: u32 = 64;

/// Predicts 1 when `Σ w_i·ℓ_i + bias ≥ 0`, reading each literal as 0 or 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<(Lit, f64)>,
    pub bias: f64,
}

impl LinearModel {
    pub fn new(weights: Vec<(Lit, f64)>, bias: f64) -> Result<LinearModel> {
        if !bias.is_finite() || weights.iter().any(|(_, w)| !w.is_finite()) {
            return Err(Error::validation("linear model weights and bias must be finite"));
        }
        Ok(LinearModel { weights, bias })
    }

    pub fn score(&self, value: impl Fn(Var) -> bool) -> f64 {
        self.weights
            .iter()
            .filter(|(l, _)| l.eval(value(l.var())))
            .map(|(_, w)| w)
            .sum::<f64>()
            + self.bias
    }

    pub fn predict(&self, value: impl Fn(Var) -> bool) -> bool {
        self.score(value) >= 0.0
    }

    pub fn max_var(&self) -> u32 {
        self.weights.iter().map(|(l, _)| l.var().id()).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

/// Integer version of the model: weights with `|w| ≤ lambda` are dropped,
/// the rest and the bias are divided by the largest magnitude among them,
/// multiplied by `scale` and rounded half away from zero. The result is
/// `Σ c_i ℓ_i ≥ −round(scale·b/M)`. Without surviving weights the bias alone
/// decides and a constant constraint comes back.
pub fn quantize_linear(model: &LinearModel, scale: u32, lambda: f64) -> Result<PbConstraint> {
    if scale == 0 {
        return Err(Error::validation("scale must be positive"));
    }
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::validation("lambda must be nonnegative"));
    }
    let kept: Vec<(Lit, f64)> = model
        .weights
        .iter()
        .copied()
        .filter(|(_, w)| w.abs() > lambda)
        .collect();
    if kept.is_empty() {
        return Ok(PbConstraint::constant(model.bias >= 0.0));
    }
    let max = kept
        .iter()
        .map(|(_, w)| w.abs())
        .fold(model.bias.abs(), f64::max);
    let q = |x: f64| (x / max * f64::from(scale)).round() as i64;
    let terms = kept
        .into_iter()
        .map(|(l, w)| (q(w), l))
        .filter(|&(c, _)| c != 0)
        .collect();
    Ok(PbConstraint::at_least(terms, -q(model.bias)))
}

/// CNF for the quantized decision region of one class. The negative class
/// uses the integer complement `Σ c_i ℓ_i ≤ k − 1`, so the two encodings
/// partition the assignments of the model's variables.
pub fn encode_linear(
    model: &LinearModel,
    scale: u32,
    lambda: f64,
    polarity: Polarity,
    first_fresh: Var,
) -> Result<Encoding> {
    let constraint = quantize_linear(model, scale, lambda)?;
    let constraint = match polarity {
        Polarity::Positive => constraint,
        Polarity::Negative => constraint.negate(),
    };
    pb_to_cnf(&constraint, first_fresh)
}
