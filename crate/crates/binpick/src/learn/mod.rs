//! Pick-success discriminators: a linear SVM on the 2-D distance-sum
//! feature and a random forest on the histogram feature, plus
//! confusion-matrix evaluation and deterministic model serialization.

mod forest;
mod metrics;
mod svm;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{DatasetRow, Label};

pub use forest::{forest_predict, train_forest, DecisionTree, ForestConfig, ForestModel, TreeNode};
pub use metrics::{evaluate, ConfusionMatrix, Evaluation};
pub use svm::{svm_predict, train_svm, train_svm_traced, SvmModel};

pub const MODEL_FILE_VERSION: u32 = 1;

/// Which feature representation a training set or model operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Svm2d,
    Hist,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRow {
    pub features: Vec<f64>,
    pub label: Label,
}

/// Labeled feature vectors of one kind with a consistent dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub kind: FeatureKind,
    pub rows: Vec<TrainingRow>,
}

impl TrainingSet {
    pub fn new(kind: FeatureKind, rows: Vec<TrainingRow>) -> Result<Self> {
        let dim = match (kind, rows.first()) {
            (FeatureKind::Svm2d, _) => 2,
            (FeatureKind::Hist, Some(r)) => r.features.len(),
            (FeatureKind::Hist, None) => 0,
        };
        for (i, r) in rows.iter().enumerate() {
            if r.features.len() != dim {
                return Err(Error::ShapeMismatch {
                    expected: dim,
                    got: r.features.len(),
                });
            }
            if r.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("row {i} has a non-finite feature")));
            }
        }
        Ok(TrainingSet { kind, rows })
    }

    pub fn from_dataset_svm(rows: &[DatasetRow]) -> Result<Self> {
        Self::new(
            FeatureKind::Svm2d,
            rows.iter()
                .map(|r| TrainingRow {
                    features: r.svm.as_array().to_vec(),
                    label: r.label,
                })
                .collect(),
        )
    }

    pub fn from_dataset_hist(rows: &[DatasetRow]) -> Result<Self> {
        Self::new(
            FeatureKind::Hist,
            rows.iter()
                .map(|r| TrainingRow {
                    features: r.hist.as_f64_vec(),
                    label: r.label,
                })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            FeatureKind::Svm2d => 2,
            FeatureKind::Hist => self.rows.first().map_or(0, |r| r.features.len()),
        }
    }

    pub fn label_counts(&self) -> (usize, usize) {
        let succ = self
            .rows
            .iter()
            .filter(|r| r.label == Label::Success)
            .count();
        (succ, self.rows.len() - succ)
    }

    pub(crate) fn require_both_labels(&self) -> Result<()> {
        let (succ, fail) = self.label_counts();
        if succ == 0 || fail == 0 {
            Err(Error::DegenerateData(format!(
                "need both labels, got {succ} success / {fail} failure rows"
            )))
        } else {
            Ok(())
        }
    }
}

/// A trained discriminator of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainedModel {
    Svm(SvmModel),
    Forest(ForestModel),
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    kind: FeatureKind,
    model: TrainedModel,
}

impl TrainedModel {
    pub fn kind(&self) -> FeatureKind {
        match self {
            TrainedModel::Svm(_) => FeatureKind::Svm2d,
            TrainedModel::Forest(_) => FeatureKind::Hist,
        }
    }

    /// Predicted label for a raw feature vector of the model's kind. Forest
    /// probabilities classify as success at >= 0.5, matching the SVM's
    /// boundary-tie convention.
    pub fn predict(&self, features: &[f64]) -> Result<Label> {
        match self {
            TrainedModel::Svm(m) => {
                if features.len() != 2 {
                    return Err(Error::ShapeMismatch {
                        expected: 2,
                        got: features.len(),
                    });
                }
                let f = crate::features::SvmFeature {
                    sum_h: features[0],
                    sum_d: features[1],
                };
                Ok(svm_predict(m, &f).0)
            }
            TrainedModel::Forest(m) => {
                let p = m.predict_probability(features)?;
                Ok(if p >= 0.5 { Label::Success } else { Label::Failure })
            }
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = ModelFile {
            version: MODEL_FILE_VERSION,
            kind: self.kind(),
            model: self.clone(),
        };
        let text = serde_json::to_string_pretty(&file)
            .map_err(|e| Error::parse(path.as_ref(), e.to_string()))?;
        std::fs::write(path.as_ref(), text + "\n").map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        if file.version != MODEL_FILE_VERSION {
            return Err(Error::parse(
                path,
                format!("unsupported model file version {}", file.version),
            ));
        }
        if file.kind != file.model.kind() {
            return Err(Error::parse(path, "feature kind tag does not match model"));
        }
        Ok(file.model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_set() -> TrainingSet {
        TrainingSet::new(
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
        .unwrap()
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let err = TrainingSet::new(
            FeatureKind::Hist,
            vec![
                TrainingRow {
                    features: vec![1.0, 2.0],
                    label: Label::Success,
                },
                TrainingRow {
                    features: vec![1.0],
                    label: Label::Failure,
                },
            ],
        );
        assert!(matches!(err, Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn model_file_roundtrip_and_kind_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = TrainedModel::Svm(train_svm(&tiny_set(), 10.0, 100, 1).unwrap());
        model.save(&path).unwrap();
        let back = TrainedModel::load(&path).unwrap();
        assert_eq!(back, model);

        // tamper with the kind tag
        let text = std::fs::read_to_string(&path).unwrap();
        let bad = text.replace("\"kind\": \"svm2d\"", "\"kind\": \"hist\"");
        std::fs::write(&path, bad).unwrap();
        assert!(matches!(TrainedModel::load(&path), Err(Error::Parse { .. })));
    }
}
