//! Bin-picking decision toolkit.
//!
//! Picking one object out of a contact-rich pile often means a finger will
//! touch a neighboring object. Whether the pick still succeeds depends on
//! how the neighbors are arranged. This crate builds the full decision
//! pipeline around that question on synthetic scenes:
//!
//! - [`geometry`]: frames, point clouds, and the finger-motion swept volume
//!   with its per-point boundary distances d and h.
//! - [`scene`]: synthetic bin scenes, virtual depth capture with occlusion,
//!   Euclidean clustering, bounding-box filtering, and pose-noise injection.
//! - [`features`]: the 2-D distance-sum feature, the binned histogram
//!   feature, and the candidate selection index.
//! - [`learn`]: a linear SVM and a random forest trained on those features,
//!   plus confusion-matrix evaluation.
//! - [`plan`]: grasp databases, candidate expansion over estimated object
//!   poses, quality-tier splitting, reachability checks, and the tiered
//!   selection loop.
//! - [`oracle`]: a rule-based quasi-static pick simulator that supplies
//!   ground-truth success/failure labels, and the dataset/experiment
//!   drivers built on it.
//! - [`cli`]: the batch command-line front end (`gen`, `dataset`, `train`,
//!   `eval`, `pick`, `gendb`) with reproducible manifests.
//!
//! Every randomized stage takes an explicit seed and is bit-reproducible;
//! see the `examples/` directory for runnable walkthroughs of each stage.


pub mod error;
pub mod features;
pub mod geometry;
pub mod learn;
pub mod oracle;
pub mod plan;



pub mod rng;
pub mod scene;

pub mod shape;

pub use error::{Error, Result};
