//! Random forest of Gini-split decision trees on the histogram feature.
//!
//! Each tree trains on a uniform subsample without replacement; per-tree
//! seeds are derived from the master seed with a fixed splitmix step, so
//! parallel and serial training produce bit-identical forests.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{FeatureKind, TrainingSet};
use crate::error::{Error, Result};
use crate::features::{HistFeature, Label};
use crate::rng::{derive_seed, seeded_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    /// Number of trees (N).
    pub n_trees: usize,
    /// Fraction of the training set sampled (without replacement) per tree.
    pub subsample_ratio: f64,
    pub max_depth: usize,
    /// Consider only ceil(sqrt(dim)) random features per split instead of
    /// all of them.
    pub feature_subsample: bool,
    /// Train trees on the rayon pool; the result is identical either way.
    pub parallel: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 200,
            subsample_ratio: 0.7,
            max_depth: 5,
            feature_subsample: false,
            parallel: true,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::Config("n_trees must be >= 1".into()));
        }
        if !(self.subsample_ratio > 0.0 && self.subsample_ratio <= 1.0) {
            return Err(Error::Config("subsample ratio must be in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        successes: u32,
        total: u32,
    },
}

/// Binary decision tree stored as a preorder arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

impl DecisionTree {
    /// Success rate stored at the leaf this feature vector lands in.
    pub fn predict_rate(&self, features: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if features[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                TreeNode::Leaf { successes, total } => {
                    return *successes as f64 / *total as f64;
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], idx: usize) -> usize {
            match &nodes[idx] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub subsample_ratio: f64,
    pub seed: u64,
    pub n_features: usize,
    pub max_depth: usize,
}

impl ForestModel {
    /// Mean of the per-tree leaf success rates; always in [0, 1].
    pub fn predict_probability(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.n_features {
            return Err(Error::ShapeMismatch {
                expected: self.n_features,
                got: features.len(),
            });
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict_rate(features)).sum();
        Ok(sum / self.trees.len() as f64)
    }
}

pub fn gini(successes: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = successes as f64 / total as f64;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

struct TreeBuilder<'a> {
    set: &'a TrainingSet,
    max_depth: usize,
    feature_pool: usize,
    features_per_split: Option<usize>,
    nodes: Vec<TreeNode>,
}

impl TreeBuilder<'_> {
    fn leaf(&mut self, rows: &[usize]) -> usize {
        let successes = rows
            .iter()
            .filter(|&&i| self.set.rows[i].label == Label::Success)
            .count() as u32;
        self.nodes.push(TreeNode::Leaf {
            successes,
            total: rows.len() as u32,
        });
        self.nodes.len() - 1
    }

    /// Best (feature, threshold) strictly improving the weighted Gini
    /// impurity, ties resolved toward the lower feature index and threshold.
    fn best_split(&self, rows: &[usize], rng: &mut impl Rng) -> Option<(usize, f64)> {
        let n = rows.len();
        let node_succ = rows
            .iter()
            .filter(|&&i| self.set.rows[i].label == Label::Success)
            .count();
        let node_gini = gini(node_succ, n);
        let features: Vec<usize> = match self.features_per_split {
            None => (0..self.feature_pool).collect(),
            Some(k) => {
                // partial Fisher-Yates, then sorted for a deterministic scan order
                let mut idx: Vec<usize> = (0..self.feature_pool).collect();
                for i in 0..k.min(self.feature_pool) {
                    let j = rng.random_range(i..self.feature_pool);
                    idx.swap(i, j);
                }
                let mut take: Vec<usize> = idx[..k.min(self.feature_pool)].to_vec();
                take.sort_unstable();
                take
            }
        };
        let mut best: Option<(f64, usize, f64)> = None;
        let mut vals: Vec<(f64, bool)> = Vec::with_capacity(n);
        for &f in &features {
            vals.clear();
            vals.extend(rows.iter().map(|&i| {
                (
                    self.set.rows[i].features[f],
                    self.set.rows[i].label == Label::Success,
                )
            }));
            vals.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite features"));
            let mut left_succ = 0usize;
            for i in 0..n - 1 {
                if vals[i].1 {
                    left_succ += 1;
                }
                if vals[i].0 == vals[i + 1].0 {
                    continue;
                }
                let left_n = i + 1;
                let right_n = n - left_n;
                let right_succ = node_succ - left_succ;
                let w = (left_n as f64 * gini(left_succ, left_n)
                    + right_n as f64 * gini(right_succ, right_n))
                    / n as f64;
                if w < node_gini - 1e-12 {
                    let threshold = 0.5 * (vals[i].0 + vals[i + 1].0);
                    let better = match &best {
                        None => true,
                        Some((bw, bf, bt)) => {
                            w < bw - 1e-15
                                || (w <= bw + 1e-15 && (f, threshold) < (*bf, *bt))
                        }
                    };
                    if better {
                        best = Some((w, f, threshold));
                    }
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn build(&mut self, rows: &[usize], depth: usize, rng: &mut impl Rng) -> usize {
        let succ = rows
            .iter()
            .filter(|&&i| self.set.rows[i].label == Label::Success)
            .count();
        if depth >= self.max_depth || succ == 0 || succ == rows.len() || rows.len() < 2 {
            return self.leaf(rows);
        }
        let Some((feature, threshold)) = self.best_split(rows, rng) else {
            return self.leaf(rows);
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| self.set.rows[i].features[feature] <= threshold);
        let idx = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            successes: 0,
            total: 1,
        }); // placeholder
        let left = self.build(&left_rows, depth + 1, rng);
        let right = self.build(&right_rows, depth + 1, rng);
        self.nodes[idx] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        idx
    }
}

fn train_one_tree(set: &TrainingSet, cfg: &ForestConfig, tree_seed: u64) -> DecisionTree {
    let m = set.rows.len();
    let n_sub = ((cfg.subsample_ratio * m as f64).ceil() as usize).clamp(1, m);
    let mut rng = seeded_rng(tree_seed);
    // uniform subsample without replacement (partial Fisher-Yates)
    let mut idx: Vec<usize> = (0..m).collect();
    for i in 0..n_sub {
        let j = rng.random_range(i..m);
        idx.swap(i, j);
    }
    let rows = &idx[..n_sub];
    let dim = set.dim();
    let mut builder = TreeBuilder {
        set,
        max_depth: cfg.max_depth,
        feature_pool: dim,
        features_per_split: cfg
            .feature_subsample
            .then(|| (dim as f64).sqrt().ceil() as usize),
        nodes: Vec::new(),
    };
    builder.build(rows, 0, &mut rng);
    DecisionTree {
        nodes: builder.nodes,
    }
}

/// Trains `cfg.n_trees` Gini trees on independent subsamples. Deterministic
/// per seed; `cfg.parallel` only changes where the work runs.
pub fn train_forest(set: &TrainingSet, cfg: &ForestConfig, seed: u64) -> Result<ForestModel> {
    if set.kind != FeatureKind::Hist {
        return Err(Error::Config("forest training expects histogram features".into()));
    }
    cfg.validate()?;
    set.require_both_labels()?;
    let seeds: Vec<u64> = (0..cfg.n_trees)
        .map(|k| derive_seed(seed, k as u64))
        .collect();
    let trees: Vec<DecisionTree> = if cfg.parallel {
        seeds
            .par_iter()
            .map(|&s| train_one_tree(set, cfg, s))
            .collect()
    } else {
        seeds
            .iter()
            .map(|&s| train_one_tree(set, cfg, s))
            .collect()
    };
    Ok(ForestModel {
        trees,
        subsample_ratio: cfg.subsample_ratio,
        seed,
        n_features: set.dim(),
        max_depth: cfg.max_depth,
    })
}

/// Success probability for a histogram feature: the mean of the leaf rates
/// across all trees.
pub fn forest_predict(model: &ForestModel, f: &HistFeature) -> Result<f64> {
    model.predict_probability(&f.as_f64_vec())
}
