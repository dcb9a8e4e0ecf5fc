//! Soft-margin linear SVM trained by seeded subgradient descent on the
//! primal hinge loss, with an epoch-level best-model rollback so the
//! reported loss never increases.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{FeatureKind, TrainingSet};
use crate::error::{Error, Result};
use crate::features::{Label, SvmFeature};
use crate::rng::seeded_rng;

/// Linear decision function `w . f + b` on the 2-D feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub weights: [f64; 2],
    pub bias: f64,
    /// Soft-margin penalty the model was trained with.
    pub c: f64,
}

/// Full-data objective: `0.5 ||w||^2 + C * sum hinge`.
fn primal_loss(w: &[f64; 2], b: f64, c: f64, set: &TrainingSet) -> f64 {
    let reg = 0.5 * (w[0] * w[0] + w[1] * w[1]);
    let hinge: f64 = set
        .rows
        .iter()
        .map(|r| {
            let y = r.label.value() as f64;
            let s = w[0] * r.features[0] + w[1] * r.features[1] + b;
            (1.0 - y * s).max(0.0)
        })
        .sum();
    reg + c * hinge
}

/// Trains and also returns the per-epoch loss curve (evaluated on the full
/// data; non-increasing by construction).
pub fn train_svm_traced(
    set: &TrainingSet,
    c: f64,
    epochs: usize,
    seed: u64,
) -> Result<(SvmModel, Vec<f64>)> {
    if set.kind != FeatureKind::Svm2d {
        return Err(Error::ShapeMismatch {
            expected: 2,
            got: set.dim(),
        });
    }
    set.require_both_labels()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config("C must be positive".into()));
    }
    if epochs == 0 {
        return Err(Error::Config("epochs must be >= 1".into()));
    }
    let m = set.rows.len();
    let lambda = 1.0 / (c * m as f64);
    let mut rng = seeded_rng(seed);
    let mut order: Vec<usize> = (0..m).collect();

    let mut w = [0.0f64; 2];
    let mut b = 0.0f64;
    let mut best_w = w;
    let mut best_b = b;
    let mut best_loss = primal_loss(&w, b, c, set);
    let mut curve = Vec::with_capacity(epochs);
    let mut t: u64 = 0;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let row = &set.rows[i];
            let y = row.label.value() as f64;
            let s = w[0] * row.features[0] + w[1] * row.features[1] + b;
            let shrink = 1.0 - eta * lambda;
            w[0] *= shrink;
            w[1] *= shrink;
            if y * s < 1.0 {
                w[0] += eta * y * row.features[0];
                w[1] += eta * y * row.features[1];
                b += eta * y;
            }
        }
        let loss = primal_loss(&w, b, c, set);
        if loss < best_loss {
            best_loss = loss;
            best_w = w;
            best_b = b;
        } else {
            // roll back to the best model so the trajectory cannot drift away
            w = best_w;
            b = best_b;
        }
        curve.push(best_loss);
    }
    Ok((
        SvmModel {
            weights: best_w,
            bias: best_b,
            c,
        },
        curve,
    ))
}

/// Deterministic soft-margin training; see [`train_svm_traced`].
pub fn train_svm(set: &TrainingSet, c: f64, epochs: usize, seed: u64) -> Result<SvmModel> {
    train_svm_traced(set, c, epochs, seed).map(|(m, _)| m)
}

/// Label plus signed margin distance `(w . f + b) / ||w||`. A point exactly
/// on the boundary classifies as success.
pub fn svm_predict(model: &SvmModel, f: &SvmFeature) -> (Label, f64) {
    let s = model.weights[0] * f.sum_h + model.weights[1] * f.sum_d + model.bias;
    let norm = (model.weights[0].powi(2) + model.weights[1].powi(2)).sqrt();
    let margin = if norm > 0.0 { s / norm } else { 0.0 };
    let label = if s >= 0.0 { Label::Success } else { Label::Failure };
    (label, margin)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::TrainingRow;
    use rand::Rng;

    fn set_of(points: &[([f64; 2], Label)]) -> TrainingSet {
        TrainingSet::new(
            FeatureKind::Svm2d,
            points
                .iter()
                .map(|(f, l)| TrainingRow {
                    features: f.to_vec(),
                    label: *l,
                })
                .collect(),
        )
        .unwrap()
    }

    fn training_accuracy(model: &SvmModel, set: &TrainingSet) -> f64 {
        let correct = set
            .rows
            .iter()
            .filter(|r| {
                let f = SvmFeature {
                    sum_h: r.features[0],
                    sum_d: r.features[1],
                };
                svm_predict(model, &f).0 == r.label
            })
            .count();
        correct as f64 / set.rows.len() as f64
    }

    #[test]
    fn separable_pair_classified_correctly() {
        let set = set_of(&[
            ([0.0, 0.0], Label::Success),
            ([1.0, 1.0], Label::Failure),
        ]);
        let model = train_svm(&set, 10.0, 200, 1).unwrap();
        assert_eq!(training_accuracy(&model, &set), 1.0);
    }

    #[test]
    fn accepts_small_unbalanced_set() {
        // 37 success / 13 failure, overlapping clouds
        let mut rng = seeded_rng(2);
        let mut rows = Vec::new();
        for i in 0..50 {
            let label = if i < 37 { Label::Success } else { Label::Failure };
            let base = if label == Label::Success { 0.02 } else { 0.08 };
            rows.push((
                [
                    base + rng.random_range(-0.02..0.02),
                    base + rng.random_range(-0.02..0.02),
                ],
                label,
            ));
        }
        let set = set_of(&rows);
        assert_eq!(set.rows.len(), 50);
        train_svm(&set, 1.0, 100, 3).unwrap();
    }

    #[test]
    fn certified_separable_cloud_reaches_full_accuracy() {
        // points generated from a known separator with margin >= 0.02, which
        // certifies separability independently of the trainer
        let w_true = [1.0f64, -0.7];
        let b_true = -0.05f64;
        let mut rng = seeded_rng(4);
        let mut rows = Vec::new();
        while rows.len() < 100 {
            let f = [rng.random_range(0.0..0.3), rng.random_range(0.0..0.3)];
            let s = w_true[0] * f[0] + w_true[1] * f[1] + b_true;
            if s.abs() < 0.02 {
                continue;
            }
            rows.push((f, if s > 0.0 { Label::Success } else { Label::Failure }));
        }
        for (f, l) in &rows {
            let s = w_true[0] * f[0] + w_true[1] * f[1] + b_true;
            assert!(s.abs() >= 0.02 && (s > 0.0) == (*l == Label::Success));
        }
        let set = set_of(&rows);
        let model = train_svm(&set, 100.0, 800, 5).unwrap();
        assert_eq!(training_accuracy(&model, &set), 1.0);
    }

    #[test]
    fn loss_curve_non_increasing() {
        let mut rng = seeded_rng(6);
        let rows: Vec<([f64; 2], Label)> = (0..60)
            .map(|i| {
                (
                    [rng.random_range(0.0..0.2), rng.random_range(0.0..0.2)],
                    if i % 3 == 0 { Label::Failure } else { Label::Success },
                )
            })
            .collect();
        let set = set_of(&rows);
        let (_, curve) = train_svm_traced(&set, 1.0, 150, 7).unwrap();
        for win in curve.windows(2) {
            assert!(win[1] <= win[0] + 1e-15);
        }
    }

    #[test]
    fn margins_match_direct_arithmetic() {
        let model = SvmModel {
            weights: [2.0, -1.0],
            bias: 0.25,
            c: 1.0,
        };
        let mut rng = seeded_rng(8);
        for _ in 0..100 {
            let f = SvmFeature {
                sum_h: rng.random_range(-1.0..1.0),
                sum_d: rng.random_range(-1.0..1.0),
            };
            let (label, margin) = svm_predict(&model, &f);
            let s = 2.0 * f.sum_h - f.sum_d + 0.25;
            let expect = s / (5.0f64).sqrt();
            assert!((margin - expect).abs() < 1e-12);
            assert_eq!(label == Label::Success, s >= 0.0);
        }
        // boundary tie goes to success
        let on_boundary = SvmFeature {
            sum_h: 0.0,
            sum_d: 0.25,
        };
        let (label, margin) = svm_predict(&model, &on_boundary);
        assert_eq!(label, Label::Success);
        assert_eq!(margin, 0.0);
    }

    #[test]
    fn single_class_is_degenerate() {
        let set = set_of(&[
            ([0.0, 0.0], Label::Success),
            ([1.0, 1.0], Label::Success),
        ]);
        assert!(matches!(
            train_svm(&set, 1.0, 10, 1),
            Err(Error::DegenerateData(_))
        ));
    }

    #[test]
    fn retraining_is_bit_identical() {
        let set = set_of(&[
            ([0.0, 0.1], Label::Success),
            ([0.2, 0.0], Label::Success),
            ([0.4, 0.5], Label::Failure),
            ([0.5, 0.4], Label::Failure),
        ]);
        let a = train_svm(&set, 2.0, 300, 42).unwrap();
        let b = train_svm(&set, 2.0, 300, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
