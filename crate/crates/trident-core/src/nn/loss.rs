//! Softmax cross-entropy over a batch of logit rows.

use crate::plane::Plane;

use super::NnError;

/// Mean negative log-likelihood plus the logit gradient.
///
/// `logits` is `batch x classes`; `labels[b]` is the true class index of row
/// `b`. The gradient is `(softmax - onehot) / batch`, so summing the returned
/// plane over the batch axis yields the gradient of the *mean* loss.
///
/// The softmax is computed with the row maximum subtracted first, so large
/// logits cannot overflow `exp`.
pub fn softmax_cross_entropy(logits: &Plane, labels: &[usize]) -> Result<(f64, Plane), NnError> {
    let (batch, classes) = (logits.rows(), logits.cols());
    if labels.len() != batch {
        return Err(NnError::ShapeMismatch(format!(
            "{} logit rows but {} labels",
            batch,
            labels.len()
        )));
    }
    if batch == 0 {
        return Err(NnError::ShapeMismatch("empty logit batch".to_string()));
    }
    for &label in labels {
        if label >= classes {
            return Err(NnError::LabelOutOfRange { label, classes });
        }
    }

    let inv_batch = 1.0 / batch as f64;
    let mut grad = Plane::zeros(batch, classes);
    let mut loss = 0.0;
    for b in 0..batch {
        let row = logits.row(b);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for &v in row {
            denom += (v - max).exp();
        }
        let log_denom = denom.ln();
        loss += -(row[labels[b]] - max - log_denom);
        let grow = grad.row_mut(b);
        for (c, &v) in row.iter().enumerate() {
            grow[c] = ((v - max).exp() / denom) * inv_batch;
        }
        grow[labels[b]] -= inv_batch;
    }
    Ok((loss * inv_batch, grad))
}

/// Softmax probabilities for one logit row (used when reporting predictions).
pub fn softmax_row(row: &[f64]) -> Vec<f64> {
    let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = row.iter().map(|&v| (v - max).exp()).collect();
    let denom: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / denom).collect()
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_cost_log_class_count() {
        // softmax of an all-equal row is uniform, so the loss is ln(classes).
        let logits = Plane::zeros(4, 6);
        let (loss, _) = softmax_cross_entropy(&logits, &[0, 1, 2, 3]).unwrap();
        assert!((loss - (6.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn gradient_is_softmax_minus_onehot_over_batch() {
        let logits = Plane::from_vec(2, 3, vec![1.0, 2.0, 3.0, 0.0, 0.0, 0.0]);
        let (_, grad) = softmax_cross_entropy(&logits, &[2, 0]).unwrap();

        let p0 = softmax_row(&[1.0, 2.0, 3.0]);
        assert!((grad.get(0, 0) - p0[0] / 2.0).abs() < 1e-12);
        assert!((grad.get(0, 1) - p0[1] / 2.0).abs() < 1e-12);
        assert!((grad.get(0, 2) - (p0[2] - 1.0) / 2.0).abs() < 1e-12);
        assert!((grad.get(1, 0) - (1.0 / 3.0 - 1.0) / 2.0).abs() < 1e-12);
        assert!((grad.get(1, 1) - (1.0 / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn per_row_gradient_sums_to_zero() {
        let logits = Plane::from_vec(3, 4, vec![0.3, -1.0, 2.0, 0.1, 5.0, 5.0, 5.0, 5.0, -2.0, 0.0, 1.0, 3.0]);
        let (_, grad) = softmax_cross_entropy(&logits, &[1, 3, 0]).unwrap();
        for b in 0..3 {
            let s: f64 = grad.row(b).iter().sum();
            assert!(s.abs() < 1e-12, "softmax - onehot sums to zero per row");
        }
    }

    #[test]
    fn large_logits_do_not_overflow() {
        let logits = Plane::from_vec(1, 3, vec![1000.0, 999.0, -1000.0]);
        let (loss, grad) = softmax_cross_entropy(&logits, &[0]).unwrap();
        assert!(loss.is_finite());
        assert!(grad.values().iter().all(|v| v.is_finite()));
        // exp(-1) / (1 + exp(-1)) for the runner-up class.
        let e = (-1.0f64).exp();
        assert!((grad.get(0, 1) - e / (1.0 + e)).abs() < 1e-9);
    }

    #[test]
    fn confident_correct_prediction_costs_little() {
        let logits = Plane::from_vec(1, 2, vec![20.0, 0.0]);
        let (loss, _) = softmax_cross_entropy(&logits, &[0]).unwrap();
        assert!(loss < 1e-8);
    }

    #[test]
    fn label_out_of_range_is_rejected() {
        let logits = Plane::zeros(1, 3);
        assert!(matches!(
            softmax_cross_entropy(&logits, &[3]),
            Err(NnError::LabelOutOfRange { label: 3, classes: 3 })
        ));
    }

    #[test]
    fn label_count_mismatch_is_rejected() {
        let logits = Plane::zeros(2, 3);
        assert!(matches!(softmax_cross_entropy(&logits, &[0]), Err(NnError::ShapeMismatch(_))));
    }
}
