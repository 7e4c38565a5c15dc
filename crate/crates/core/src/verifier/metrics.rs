use crate::error::{Error, Result};

fn check_pair(ppv_min: f64, ppv_max: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&ppv_min) || !(0.0..=1.0).contains(&ppv_max) {
        return Err(Error::Contract(format!(
            "PPVs must lie in [0, 1], got min {ppv_min} and max {ppv_max}"
        )));
    }
    if ppv_min > ppv_max {
        return Err(Error::Contract(format!(
            "minimum PPV {ppv_min} exceeds maximum {ppv_max}"
        )));
    }
    Ok(())
}

/// `ppv_min / ppv_max`, and 1 when both are 0.
pub fn disparate_impact(ppv_min: f64, ppv_max: f64) -> Result<f64> {
    check_pair(ppv_min, ppv_max)?;
    Ok(if ppv_max == 0.0 { 1.0 } else { ppv_min / ppv_max })
}

/// `ppv_max − ppv_min`.
pub fn statistical_parity(ppv_min: f64, ppv_max: f64) -> Result<f64> {
    check_pair(ppv_min, ppv_max)?;
    Ok(ppv_max - ppv_min)
}

/// Both gaps must be within ε, so the scalar is the larger one.
pub fn equalized_odds(tpr_gap: f64, fpr_gap: f64) -> f64 {
    tpr_gap.max(fpr_gap)
}

/// Inputs of the sample-size guideline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSizeQuery {
    /// Protected Boolean variables.
    pub n: u64,
    /// Non-protected Boolean variables, at least 2.
    pub m: u64,
    /// Multiplicative error, above 1.
    pub epsilon0: f64,
    /// Failure probability in (0, 1).
    pub delta: f64,
}

/// `⌈(n + ln(1/δ)) · ln m / ln ε0⌉` with the hidden constant set to 1: an
/// order-of-magnitude guideline for how many rows make the estimated DI and
/// SP accurate within factor `ε0` with confidence `1 − δ`, not a guarantee.
pub fn required_sample_size(q: SampleSizeQuery) -> Result<u64> {
    if q.epsilon0.is_nan() || q.epsilon0 <= 1.0 || !q.epsilon0.is_finite() {
        return Err(Error::validation(format!("epsilon0 must exceed 1, got {}", q.epsilon0)));
    }
    if !(q.delta > 0.0 && q.delta < 1.0) {
        return Err(Error::validation(format!("delta must lie in (0, 1), got {}", q.delta)));
    }
    if q.m < 2 {
        return Err(Error::validation(format!("m must be at least 2, got {}", q.m)));
    }
    let k = (q.n as f64 + (1.0 / q.delta).ln()) * (q.m as f64).ln() / q.epsilon0.ln();
    Ok(k.ceil().max(0.0) as u64)
}
