//! Confusion-matrix evaluation of a trained discriminator, in the
//! actual-outcome x identified-outcome orientation.

use serde::{Deserialize, Serialize};

use super::{TrainedModel, TrainingSet};
use crate::error::{Error, Result};
use crate::features::Label;

/// Counts over (actual success|failure) x (identified success|failure).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub succeeded_identified_success: usize,
    pub succeeded_identified_failure: usize,
    pub failed_identified_success: usize,
    pub failed_identified_failure: usize,
}

impl ConfusionMatrix {
    pub fn from_counts(ss: usize, sf: usize, fs: usize, ff: usize) -> Self {
        ConfusionMatrix {
            succeeded_identified_success: ss,
            succeeded_identified_failure: sf,
            failed_identified_success: fs,
            failed_identified_failure: ff,
        }
    }

    pub fn record(&mut self, actual: Label, identified: Label) {
        match (actual, identified) {
            (Label::Success, Label::Success) => self.succeeded_identified_success += 1,
            (Label::Success, Label::Failure) => self.succeeded_identified_failure += 1,
            (Label::Failure, Label::Success) => self.failed_identified_success += 1,
            (Label::Failure, Label::Failure) => self.failed_identified_failure += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.succeeded_identified_success
            + self.succeeded_identified_failure
            + self.failed_identified_success
            + self.failed_identified_failure
    }

    /// P(actual success | identified success): the success rate when picks
    /// identified as failures are skipped. `None` when nothing was
    /// identified as success.
    pub fn filtered_success_rate(&self) -> Option<f64> {
        let identified = self.succeeded_identified_success + self.failed_identified_success;
        if identified == 0 {
            None
        } else {
            Some(self.succeeded_identified_success as f64 / identified as f64)
        }
    }

    /// Fraction of all trials that were identified as success and actually
    /// succeeded.
    pub fn identified_success_rate(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        self.succeeded_identified_success as f64 / self.total() as f64
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        (self.succeeded_identified_success + self.failed_identified_failure) as f64
            / self.total() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub confusion: ConfusionMatrix,
    pub filtered_success_rate: Option<f64>,
    pub identified_success_rate: f64,
    pub accuracy: f64,
}

/// Runs the model over every row and tallies actual vs identified outcomes.
pub fn evaluate(model: &TrainedModel, set: &TrainingSet) -> Result<Evaluation> {
    if model.kind() != set.kind {
        return Err(Error::Config(
            "model feature kind does not match the dataset".into(),
        ));
    }
    let mut confusion = ConfusionMatrix::default();
    for row in &set.rows {
        let identified = model.predict(&row.features)?;
        confusion.record(row.label, identified);
    }
    Ok(Evaluation {
        confusion,
        filtered_success_rate: confusion.filtered_success_rate(),
        identified_success_rate: confusion.identified_success_rate(),
        accuracy: confusion.accuracy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::{train_svm, FeatureKind, TrainingRow};

    #[test]
    fn derived_rates_match_published_arithmetic() {
        let m = ConfusionMatrix::from_counts(33, 7, 0, 10);
        assert_eq!(m.total(), 50);
        assert!((m.filtered_success_rate().unwrap() - 1.0).abs() < 1e-12);
        assert!((m.identified_success_rate() - 0.66).abs() < 1e-12);

        let m = ConfusionMatrix::from_counts(39, 3, 3, 5);
        let filtered = m.filtered_success_rate().unwrap();
        assert!((filtered - 39.0 / 42.0).abs() < 1e-12);
        assert!((100.0 * filtered - 92.9).abs() < 0.05);
        assert!((m.identified_success_rate() - 0.78).abs() < 1e-12);
    }

    #[test]
    fn perfect_classifier_has_zero_off_diagonals() {
        let rows: Vec<TrainingRow> = (0..10)
            .map(|i| {
                let label = if i < 6 { Label::Success } else { Label::Failure };
                let v = if label == Label::Success { 0.0 } else { 1.0 };
                TrainingRow {
                    features: vec![v, v],
                    label,
                }
            })
            .collect();
        let set = TrainingSet::new(FeatureKind::Svm2d, rows).unwrap();
        let model = TrainedModel::Svm(train_svm(&set, 100.0, 300, 1).unwrap());
        let eval = evaluate(&model, &set).unwrap();
        assert_eq!(eval.confusion.succeeded_identified_failure, 0);
        assert_eq!(eval.confusion.failed_identified_success, 0);
        assert_eq!(eval.accuracy, 1.0);
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let set = TrainingSet::new(
            FeatureKind::Hist,
            vec![
                TrainingRow {
                    features: vec![1.0, 2.0],
                    label: Label::Success,
                },
                TrainingRow {
                    features: vec![0.0, 5.0],
                    label: Label::Failure,
                },
            ],
        )
        .unwrap();
        let svm_set = TrainingSet::new(
            FeatureKind::Svm2d,
            vec![
                TrainingRow {
                    features: vec![0.0, 0.0],
                    label: Label::Success,
                },
                TrainingRow {
                    features: vec![1.0, 1.0],
                    label: Label::Failure,
                },
            ],
        )
        .unwrap();
        let model = TrainedModel::Svm(train_svm(&svm_set, 1.0, 50, 1).unwrap());
        assert!(evaluate(&model, &set).is_err());
    }
}
