use crate::error::{Error, Result};

/// Bit `i` is set iff `y_hat[i] >= tau`.
pub fn threshold_filter(y_hat: &[f64], tau: f64) -> Vec<bool> {
    y_hat.iter().map(|v| *v >= tau).collect()
}

/// Micro-aggregated counts and scores. Undefined ratios are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub true_positives: u64,
    pub false_positives: u64,
    pub false_negatives: u64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

impl Metrics {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> Self {
        let ratio = |num: u64, den: u64| {
            if den == 0 {
                f64::NAN
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f_measure = 2.0 * precision * recall / (precision + recall);
        Self {
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            precision,
            recall,
            f_measure,
        }
    }
}

fn counts(predictions: &[bool], labels: &[bool]) -> (u64, u64, u64) {
    let mut c = (0, 0, 0);
    for (p, l) in predictions.iter().zip(labels) {
        match (p, l) {
            (true, true) => c.0 += 1,
            (true, false) => c.1 += 1,
            (false, true) => c.2 += 1,
            (false, false) => {}
        }
    }
    c
}

pub fn evaluate(predictions: &[bool], labels: &[bool]) -> Result<Metrics> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            context: "prediction and label bits",
            expected: labels.len(),
            actual: predictions.len(),
        });
    }
    let (tp, fp, fn_) = counts(predictions, labels);
    Ok(Metrics::from_counts(tp, fp, fn_))
}

/// Per-row F-measure summary over rows of width `width`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub mean: f64,
    pub std_dev: f64,
    /// Rows with a defined F-measure.
    pub defined: usize,
    pub rows: usize,
}

pub fn per_sample_f_measure(
    predictions: &[bool],
    labels: &[bool],
    width: usize,
) -> Result<SampleStats> {
    if predictions.len() != labels.len() || width == 0 || !labels.len().is_multiple_of(width) {
        return Err(Error::DimensionMismatch {
            context: "per-sample evaluation",
            expected: labels.len(),
            actual: predictions.len(),
        });
    }
    let scores: Vec<f64> = predictions
        .chunks(width)
        .zip(labels.chunks(width))
        .map(|(p, l)| {
            let (tp, fp, fn_) = counts(p, l);
            Metrics::from_counts(tp, fp, fn_).f_measure
        })
        .filter(|f| !f.is_nan())
        .collect();
    let n = scores.len();
    let mean = if n == 0 {
        f64::NAN
    } else {
        scores.iter().sum::<f64>() / n as f64
    };
    let std_dev = if n < 2 {
        f64::NAN
    } else {
        (scores.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Ok(SampleStats {
        mean,
        std_dev,
        defined: n,
        rows: labels.len() / width,
    })
}
