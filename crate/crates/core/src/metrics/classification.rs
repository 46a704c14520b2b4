//! Eight-class issue-detection metrics.

use serde::{Deserialize, Serialize};

use crate::model::SecurityType;

const N: usize = SecurityType::ALL.len();

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassificationError {
    #[error("no prediction/reference pairs to score")]
    EmptyInput,
}

/// Counts indexed by `(reference, predicted)` in canonical type order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: [[u64; N]; N],
}

impl ConfusionMatrix {
    pub fn record(&mut self, predicted: SecurityType, reference: SecurityType) {
        self.counts[reference.index()][predicted.index()] += 1;
    }

    pub fn get(&self, reference: SecurityType, predicted: SecurityType) -> u64 {
        self.counts[reference.index()][predicted.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..N).map(|k| self.counts[k][k]).sum()
    }

    pub fn rows(&self) -> &[[u64; N]; N] {
        &self.counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub security_type: SecurityType,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Macro-averaged precision, recall and F1 plus accuracy, all on [0, 100].
/// A class with no predictions (or no references) contributes 0 for the
/// undefined ratio; macro F1 is the mean of per-class F1 scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub matrix: ConfusionMatrix,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Pairs are `(predicted, reference)`.
pub fn classification_report(
    pairs: &[(SecurityType, SecurityType)],
) -> Result<ClassificationReport, ClassificationError> {
    if pairs.is_empty() {
        return Err(ClassificationError::EmptyInput);
    }
    let mut matrix = ConfusionMatrix::default();
    for &(predicted, reference) in pairs {
        matrix.record(predicted, reference);
    }
    let counts = matrix.rows();
    let per_class: Vec<ClassMetrics> = SecurityType::ALL
        .iter()
        .map(|&t| {
            let k = t.index();
            let tp = counts[k][k];
            let predicted: u64 = (0..N).map(|r| counts[r][k]).sum();
            let support: u64 = counts[k].iter().sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics { security_type: t, precision, recall, f1, support }
        })
        .collect();
    let mean = |f: fn(&ClassMetrics) -> f64| 100.0 * per_class.iter().map(f).sum::<f64>() / N as f64;
    Ok(ClassificationReport {
        precision: mean(|c| c.precision),
        recall: mean(|c| c.recall),
        f1: mean(|c| c.f1),
        accuracy: 100.0 * ratio(matrix.correct(), matrix.total()),
        per_class,
        matrix,
    })
}
