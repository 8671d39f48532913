use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    Mae,
    /// Binary cross-entropy on the logistic of the affine output.
    CrossEntropy,
}

impl LossKind {
    /// How raw outputs map to `[0, 1]` scores before thresholding.
    pub fn output_link(self) -> OutputLink {
        match self {
            LossKind::CrossEntropy => OutputLink::Logistic,
            LossKind::Mse | LossKind::Mae => OutputLink::Identity,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputLink {
    Identity,
    Logistic,
}

impl OutputLink {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            OutputLink::Identity => v,
            OutputLink::Logistic => sigmoid(v),
        }
    }
}

pub(crate) fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^v)` without overflow.
fn softplus(v: f64) -> f64 {
    v.max(0.0) + (-v.abs()).exp().ln_1p()
}

/// Per-element loss; the batch loss is its mean.
pub(crate) fn element_loss(kind: LossKind, y_hat: f64, y: f64) -> f64 {
    match kind {
        LossKind::Mse => (y - y_hat) * (y - y_hat),
        LossKind::Mae => (y - y_hat).abs(),
        // -[y log s + (1 - y) log(1 - s)] with s = sigmoid(y_hat)
        LossKind::CrossEntropy => softplus(y_hat) - y * y_hat,
    }
}

/// Derivative of [`element_loss`] with respect to `y_hat`.
pub(crate) fn element_grad(kind: LossKind, y_hat: f64, y: f64) -> f64 {
    match kind {
        LossKind::Mse => 2.0 * (y_hat - y),
        LossKind::Mae => {
            let r = y_hat - y;
            if r > 0.0 {
                1.0
            } else if r < 0.0 {
                -1.0
            } else {
                0.0
            }
        }
        LossKind::CrossEntropy => sigmoid(y_hat) - y,
    }
}

fn check_len(y_hat: &[f64], y: &[f64]) -> Result<()> {
    if y_hat.len() != y.len() || y.is_empty() {
        return Err(Error::DimensionMismatch {
            context: "loss operands",
            expected: y_hat.len(),
            actual: y.len(),
        });
    }
    Ok(())
}

/// Mean elementwise loss.
pub fn loss(kind: LossKind, y_hat: &[f64], y: &[f64]) -> Result<f64> {
    check_len(y_hat, y)?;
    let total: f64 = y_hat
        .iter()
        .zip(y)
        .map(|(a, b)| element_loss(kind, *a, *b))
        .sum();
    Ok(total / y.len() as f64)
}

/// Gradient of [`loss`] with respect to `y_hat`.
pub fn loss_gradient(kind: LossKind, y_hat: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_len(y_hat, y)?;
    let n = y.len() as f64;
    Ok(y_hat
        .iter()
        .zip(y)
        .map(|(a, b)| element_grad(kind, *a, *b) / n)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let y = [1.0, 0.0, 1.0];
        assert_eq!(loss(LossKind::Mse, &y, &y).unwrap(), 0.0);
        assert_eq!(loss(LossKind::Mae, &[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        let ce = loss(LossKind::CrossEntropy, &[0.0], &[1.0]).unwrap();
        assert!((ce - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((loss(LossKind::Mse, &[0.5, 2.0], &[0.0, 1.0]).unwrap() - 0.625).abs() < 1e-15);
        assert!(loss(LossKind::Mse, &[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn cross_entropy_matches_log_form() {
        for (yh, y) in [(2.5, 1.0), (-3.0, 0.0), (0.7, 0.0), (-40.0, 1.0)] {
            let s: f64 = sigmoid(yh);
            let direct = -(y * s.ln() + (1.0 - y) * (1.0 - s).ln());
            let stable = element_loss(LossKind::CrossEntropy, yh, y);
            assert!(
                (direct - stable).abs() < 1e-9 * direct.abs().max(1.0),
                "{yh} {y}"
            );
        }
        assert!(element_loss(LossKind::CrossEntropy, 800.0, 0.0).is_finite());
    }

    #[test]
    fn links() {
        assert_eq!(LossKind::Mse.output_link(), OutputLink::Identity);
        assert_eq!(LossKind::CrossEntropy.output_link(), OutputLink::Logistic);
        assert_eq!(OutputLink::Logistic.apply(0.0), 0.5);
        assert_eq!(OutputLink::Identity.apply(0.3), 0.3);
    }
}
