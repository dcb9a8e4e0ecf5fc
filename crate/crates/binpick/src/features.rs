//! Feature extraction from swept-point sets: the 2-D distance-sum feature
//! used by the linear SVM, the binned histogram feature used by the random
//! forest, and the selection index used to rank surviving candidates.
//!
//! All features expect clamped swept points (d, h >= 0); see
//! [`crate::geometry::clamp_nonnegative`].

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SweptPoint;

/// Two-dimensional feature: the sums of the h and d distances over every
/// point in the swept volume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmFeature {
    pub sum_h: f64,
    pub sum_d: f64,
}

impl SvmFeature {
    pub fn as_array(&self) -> [f64; 2] {
        [self.sum_h, self.sum_d]
    }
}

/// (sum of h, sum of d) over the swept points; (0, 0) for an empty set.
pub fn svm_feature(swept: &[SweptPoint]) -> SvmFeature {
    let mut sum_h = 0.0;
    let mut sum_d = 0.0;
    for sp in swept {
        debug_assert!(sp.d >= 0.0 && sp.h >= 0.0, "features need clamped distances");
        sum_h += sp.h;
        sum_d += sp.d;
    }
    SvmFeature { sum_h, sum_d }
}

/// Histogram binning over the d (y direction) and h (z direction) distances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinningConfig {
    pub bins_y: usize,
    pub bins_z: usize,
    /// Bin width along d, meters.
    pub width_y: f64,
    /// Bin width along h, meters.
    pub width_z: f64,
}

impl Default for BinningConfig {
    fn default() -> Self {
        BinningConfig {
            bins_y: 5,
            bins_z: 5,
            width_y: 0.01,
            width_z: 0.01,
        }
    }
}

impl BinningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bins_y >= 1 && self.bins_z >= 1 && self.width_y > 0.0 && self.width_z > 0.0 {
            Ok(())
        } else {
            Err(Error::Config("bin counts must be >= 1 and widths positive".into()))
        }
    }

    pub fn dim(&self) -> usize {
        self.bins_y * self.bins_z
    }
}

/// 1-indexed bin indices (j_y, j_z) for a clamped (d, h) pair. The last bin
/// absorbs overflow.
pub fn bin_indices(d: f64, h: f64, cfg: &BinningConfig) -> (usize, usize) {
    debug_assert!(d >= 0.0 && h >= 0.0);
    let j_y = ((d / cfg.width_y).floor() as usize + 1).min(cfg.bins_y);
    let j_z = ((h / cfg.width_z).floor() as usize + 1).min(cfg.bins_z);
    (j_y, j_z)
}

/// Per-bin point counts, row-major over (j_z, j_y): index
/// `(j_z - 1) * bins_y + (j_y - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistFeature {
    pub counts: Vec<u32>,
    pub bins_y: usize,
    pub bins_z: usize,
}

impl HistFeature {
    pub fn as_f64_vec(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }
}

/// Counts the swept points per (j_y, j_z) bin; total equals the number of
/// points.
pub fn hist_feature(swept: &[SweptPoint], cfg: &BinningConfig) -> HistFeature {
    let mut counts = vec![0u32; cfg.dim()];
    for sp in swept {
        let (j_y, j_z) = bin_indices(sp.d, sp.h, cfg);
        counts[(j_z - 1) * cfg.bins_y + (j_y - 1)] += 1;
    }
    HistFeature {
        counts,
        bins_y: cfg.bins_y,
        bins_z: cfg.bins_z,
    }
}

/// Pick outcome label for a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Success,
    Failure,
}

impl Label {
    pub fn value(&self) -> i8 {
        match self {
            Label::Success => 1,
            Label::Failure => -1,
        }
    }

    pub fn from_value(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Label::Success),
            -1 => Ok(Label::Failure),
            _ => Err(Error::Config(format!("label must be +1 or -1, got {v}"))),
        }
    }
}

/// Candidate ranking index `-(sum of alpha*h + beta*d)`: prefers corridors
/// that are empty or whose points sit at the boundary. Always <= 0; the
/// training phase uses alpha = beta = 0 so every candidate ties.
pub fn selection_index(swept: &[SweptPoint], alpha: f64, beta: f64) -> f64 {
    assert!(alpha >= 0.0 && beta >= 0.0, "weights must be nonnegative");
    -swept.iter().map(|sp| alpha * sp.h + beta * sp.d).sum::<f64>()
}

// ---------------------------------------------------------------------------
// Dataset rows (CSV external interface)
// ---------------------------------------------------------------------------

/// One labeled trial carrying both feature representations.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRow {
    pub label: Label,
    pub svm: SvmFeature,
    pub hist: HistFeature,
}

/// CSV layout: `label,sum_h,sum_d,bin_z1_y1,...` with the histogram columns
/// row-major over (j_z, j_y). Labels are `+1` / `-1`.
pub fn write_dataset(path: impl AsRef<Path>, rows: &[DatasetRow], cfg: &BinningConfig) -> Result<()> {
    let mut out = String::from("label,sum_h,sum_d");
    for j_z in 1..=cfg.bins_z {
        for j_y in 1..=cfg.bins_y {
            let _ = write!(out, ",bin_z{j_z}_y{j_y}");
        }
    }
    out.push('\n');
    for row in rows {
        if row.hist.counts.len() != cfg.dim() {
            return Err(Error::ShapeMismatch {
                expected: cfg.dim(),
                got: row.hist.counts.len(),
            });
        }
        let label = if row.label == Label::Success { "+1" } else { "-1" };
        let _ = write!(out, "{label},{},{}", row.svm.sum_h, row.svm.sum_d);
        for c in &row.hist.counts {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    std::fs::write(path.as_ref(), out).map_err(|e| Error::io(path.as_ref(), e))
}

/// Reads a dataset CSV; bin counts are recovered from the header names.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<(Vec<DatasetRow>, usize, usize)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(path, "empty file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 4 || cols[0] != "label" || cols[1] != "sum_h" || cols[2] != "sum_d" {
        return Err(Error::parse(path, "unexpected header"));
    }
    let mut bins_y = 0usize;
    let mut bins_z = 0usize;
    for name in &cols[3..] {
        let rest = name
            .strip_prefix("bin_z")
            .ok_or_else(|| Error::parse(path, format!("bad column name {name}")))?;
        let (z, y) = rest
            .split_once("_y")
            .ok_or_else(|| Error::parse(path, format!("bad column name {name}")))?;
        let z: usize = z.parse().map_err(|_| Error::parse(path, "bad bin index"))?;
        let y: usize = y.parse().map_err(|_| Error::parse(path, "bad bin index"))?;
        bins_z = bins_z.max(z);
        bins_y = bins_y.max(y);
    }
    if bins_y * bins_z != cols.len() - 3 {
        return Err(Error::parse(path, "histogram columns do not form a full grid"));
    }
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::parse(path, format!("line {}: wrong field count", ln + 2)));
        }
        let label = Label::from_value(
            fields[0]
                .parse::<i8>()
                .map_err(|_| Error::parse(path, format!("line {}: bad label", ln + 2)))?,
        )?;
        let sum_h: f64 = fields[1]
            .parse()
            .map_err(|_| Error::parse(path, format!("line {}: bad sum_h", ln + 2)))?;
        let sum_d: f64 = fields[2]
            .parse()
            .map_err(|_| Error::parse(path, format!("line {}: bad sum_d", ln + 2)))?;
        let mut counts = Vec::with_capacity(cols.len() - 3);
        for f in &fields[3..] {
            counts.push(
                f.parse::<u32>()
                    .map_err(|_| Error::parse(path, format!("line {}: bad count", ln + 2)))?,
            );
        }
        rows.push(DatasetRow {
            label,
            svm: SvmFeature { sum_h, sum_d },
            hist: HistFeature {
                counts,
                bins_y,
                bins_z,
            },
        });
    }
    Ok((rows, bins_y, bins_z))
}
