//! Classification metrics: accuracy and confusion counts, per fold and
//! aggregated across folds.

use super::train::predict;
use super::{HarnessError, PreparedDataset};
use crate::model::AnyModel;

/// Evaluation results. For a single fold, `per_fold` holds that one
/// accuracy; [`Metrics::aggregate`] combines folds into a cross-validation
/// summary whose confusion matrix is the elementwise sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// Correct fraction: confusion trace / confusion total.
    pub accuracy: f64,
    /// `confusion[true_class][predicted_class]` = record count.
    pub confusion: Vec<Vec<usize>>,
    /// Accuracy of each contributing fold.
    pub per_fold: Vec<f64>,
    /// Arithmetic mean of `per_fold`.
    pub mean_accuracy: f64,
}

impl Metrics {
    /// Metrics of a single evaluation from its confusion counts.
    pub fn from_confusion(confusion: Vec<Vec<usize>>) -> Self {
        let accuracy = trace(&confusion) as f64 / total(&confusion).max(1) as f64;
        Self { accuracy, confusion, per_fold: vec![accuracy], mean_accuracy: accuracy }
    }

    /// Combines per-fold metrics: confusion matrices sum, fold accuracies
    /// are kept, and `accuracy` becomes the pooled (trace/total) value.
    pub fn aggregate(folds: &[Metrics]) -> Self {
        assert!(!folds.is_empty(), "cannot aggregate zero folds");
        let classes = folds[0].confusion.len();
        let mut confusion = vec![vec![0usize; classes]; classes];
        for fold in folds {
            assert_eq!(fold.confusion.len(), classes, "folds must agree on class count");
            for (row_sum, row) in confusion.iter_mut().zip(&fold.confusion) {
                for (cell_sum, &cell) in row_sum.iter_mut().zip(row) {
                    *cell_sum += cell;
                }
            }
        }
        let per_fold: Vec<f64> = folds.iter().map(|f| f.accuracy).collect();
        let mean_accuracy = per_fold.iter().sum::<f64>() / per_fold.len() as f64;
        let accuracy = trace(&confusion) as f64 / total(&confusion).max(1) as f64;
        Self { accuracy, confusion, per_fold, mean_accuracy }
    }

    /// Total records counted in the confusion matrix.
    pub fn total(&self) -> usize {
        total(&self.confusion)
    }

    /// Correctly classified records.
    pub fn trace(&self) -> usize {
        trace(&self.confusion)
    }
}

fn total(confusion: &[Vec<usize>]) -> usize {
    confusion.iter().map(|row| row.iter().sum::<usize>()).sum()
}

fn trace(confusion: &[Vec<usize>]) -> usize {
    confusion.iter().enumerate().map(|(i, row)| row[i]).sum()
}

/// Runs the model in eval mode over the records at `test_indices` and
/// tallies the confusion matrix.
pub fn evaluate(
    model: &AnyModel,
    data: &PreparedDataset,
    test_indices: &[usize],
) -> Result<Metrics, HarnessError> {
    if test_indices.is_empty() {
        return Err(HarnessError::EmptyIndices { context: "evaluation" });
    }
    let classes = model.classes();
    let mut confusion = vec![vec![0usize; classes]; classes];
    let predictions = predict(model, data, test_indices)?;
    for (&index, prediction) in test_indices.iter().zip(predictions) {
        let label = data.labels[index];
        if label >= classes {
            return Err(HarnessError::LabelOutOfRange { label, classes });
        }
        confusion[label][prediction] += 1;
    }
    Ok(Metrics::from_confusion(confusion))
}
