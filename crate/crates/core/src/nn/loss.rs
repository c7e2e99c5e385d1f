//! Reconstruction and classification losses with their output-side gradients.

use crate::error::{Error, Result};

/// Predictions are clamped to `[BCE_EPSILON, 1 - BCE_EPSILON]` before the log.
pub const BCE_EPSILON: f64 = 1e-7;

/// Mean squared error `(1/n) Σ (x_a - x̂_a)²`.
pub fn mse(x: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x.len() != x_hat.len() {
        return Err(Error::shape("mse operands", x.len(), x_hat.len()));
    }
    if x.is_empty() {
        return Err(Error::domain("mse needs at least one component"));
    }
    let sum: f64 = x
        .iter()
        .zip(x_hat.iter())
        .map(|(&a, &b)| {
            let d = a - b;
            d * d
        })
        .sum();
    Ok(sum / x.len() as f64)
}

/// `d mse / d x̂`, i.e. `(2/n)(x̂ - x)` per component.
pub fn mse_gradient(x: &[f64], x_hat: &[f64]) -> Result<Vec<f64>> {
    if x.len() != x_hat.len() {
        return Err(Error::shape("mse operands", x.len(), x_hat.len()));
    }
    if x.is_empty() {
        return Err(Error::domain("mse needs at least one component"));
    }
    let scale = 2.0 / x.len() as f64;
    Ok(x.iter().zip(x_hat.iter()).map(|(&a, &b)| scale * (b - a)).collect())
}

fn check_bce_label(y_true: f64) -> Result<()> {
    if y_true != 0.0 && y_true != 1.0 {
        return Err(Error::domain(format!("bce label must be 0 or 1, got {y_true}")));
    }
    Ok(())
}

/// Binary cross-entropy `-[y ln ŷ + (1-y) ln(1-ŷ)]` with clamped prediction.
pub fn binary_cross_entropy(y_true: f64, y_pred: f64) -> Result<f64> {
    check_bce_label(y_true)?;
    let p = y_pred.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
    Ok(-(y_true * p.ln() + (1.0 - y_true) * (1.0 - p).ln()))
}

/// `d bce / d ŷ` at the clamped prediction.
pub fn bce_gradient(y_true: f64, y_pred: f64) -> Result<f64> {
    check_bce_label(y_true)?;
    let p = y_pred.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
    Ok(-y_true / p + (1.0 - y_true) / (1.0 - p))
}
