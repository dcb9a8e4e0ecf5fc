//! Grasp databases, candidate expansion over estimated object poses,
//! quality-tier splitting, a geometric reachability check, and the tiered
//! selection loop combining the discriminator with the selection index.
//!
//! Full manipulator inverse kinematics is out of scope: reachability is a
//! workspace box on the wrist position plus a finger-corridor/bin-wall
//! collision check, which preserves the filtering semantics of the
//! pipeline.

use std::path::Path;

use nalgebra::Rotation3;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::selection_index;
use crate::geometry::{
    build_swept_volume, clamp_nonnegative, classify_points, remove_target_points, GripperModel,
    Point3, PointCloud, Pose, SweptPoint, Vec3,
};
use crate::rng::seeded_rng;
use crate::scene::Bin;
use crate::shape::{ObjectModel, Shape};

pub const DB_FILE_VERSION: u32 = 1;

/// One stable grasping configuration in the object frame: wrist pose,
/// finger joint vector, and a precomputed stability index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspEntry {
    pub pose: Pose,
    pub joints: Vec<f64>,
    pub stability: f64,
}

/// Grasp configuration database for one object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspDatabase {
    pub version: u32,
    pub object: String,
    pub entries: Vec<GraspEntry>,
}

impl GraspDatabase {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::parse(path.as_ref(), e.to_string()))?;
        std::fs::write(path.as_ref(), text + "\n").map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let db: GraspDatabase =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        if db.version != DB_FILE_VERSION {
            return Err(Error::parse(
                path,
                format!("unsupported grasp database version {}", db.version),
            ));
        }
        if db.entries.is_empty() {
            return Err(Error::parse(path, "grasp database has no entries"));
        }
        if db.entries.iter().any(|e| !e.stability.is_finite()) {
            return Err(Error::parse(path, "non-finite stability index"));
        }
        Ok(db)
    }
}

/// Procedural top-down antipodal grasp generator for primitive objects.
///
/// Entries vary the approach azimuth, the lateral offset along the grasp
/// line, and the fingertip depth. The stability index is a simple
/// wrench-margin proxy: deeper, more centered grasps with more closing
/// reserve score higher. A tiny seeded jitter keeps indices distinct so
/// quantile tiering is unambiguous.
pub fn generate_grasp_db(
    object: &ObjectModel,
    gripper: &GripperModel,
    count: usize,
    seed: u64,
) -> Result<GraspDatabase> {
    gripper.validate()?;
    if count == 0 {
        return Err(Error::Config("database size must be >= 1".into()));
    }
    // closing span available at the preshape
    let max_width = 2.0 * gripper.preshape_half_opening;
    // (closing width, free offset half-range) per closing azimuth choice
    let grasp_lines: Vec<(f64, f64, f64)> = match object.shape {
        Shape::Box { size } => {
            let mut v = Vec::new();
            // closing across x: fingers straddle the x faces, offset runs
            // along y; azimuth 0 means closing axis = object x
            if size[0] < max_width * 0.95 {
                v.push((0.0, size[0], size[1] * 0.35));
            }
            if size[1] < max_width * 0.95 {
                v.push((std::f64::consts::FRAC_PI_2, size[1], size[0] * 0.35));
            }
            if v.is_empty() {
                return Err(Error::Config(
                    "object is too wide for the gripper preshape".into(),
                ));
            }
            v
        }
        Shape::Cylinder { radius, .. } | Shape::Sphere { radius } => {
            if 2.0 * radius >= max_width * 0.95 {
                return Err(Error::Config(
                    "object is too wide for the gripper preshape".into(),
                ));
            }
            // rotationally symmetric: several azimuths, no lateral freedom
            (0..8)
                .map(|k| (std::f64::consts::PI * k as f64 / 8.0, 2.0 * radius, 0.0))
                .collect()
        }
    };
    let depth_fracs = [0.3, 0.55, 0.8]; // fingertip height above the object bottom
    let offsets_per_line = (count / (grasp_lines.len() * depth_fracs.len()) + 1).max(1);
    let mut rng = seeded_rng(seed);
    let mut entries = Vec::with_capacity(count);
    'fill: loop {
        for off_i in 0..offsets_per_line {
            for (azimuth, width, off_range) in &grasp_lines {
                for (d_i, depth_frac) in depth_fracs.iter().enumerate() {
                    if entries.len() >= count {
                        break 'fill;
                    }
                    let offset = if offsets_per_line == 1 || *off_range == 0.0 {
                        0.0
                    } else {
                        -off_range
                            + 2.0 * off_range * off_i as f64 / (offsets_per_line - 1) as f64
                    };
                    let hh = object.half_height();
                    // fingertip plane inside the object, measured from its bottom
                    let tip_z = -hh + 2.0 * hh * depth_frac;
                    let wrist_z = tip_z + gripper.finger_length;
                    // wrist z axis up, closing axis rotated by azimuth; the
                    // wrist approaches along its local -z, i.e. straight down
                    let rotation = Rotation3::from_axis_angle(
                        &Vec3::z_axis(),
                        azimuth - std::f64::consts::FRAC_PI_2,
                    );
                    let along = Vec3::new(azimuth.cos(), azimuth.sin(), 0.0);
                    let free = Vec3::new(-azimuth.sin(), azimuth.cos(), 0.0);
                    let _ = along;
                    let position = Point3::from(free * offset + Vec3::new(0.0, 0.0, wrist_z));
                    let center_score = if *off_range > 0.0 {
                        1.0 - offset.abs() / off_range
                    } else {
                        1.0
                    };
                    let depth_score = 1.0 - depth_frac;
                    let fit_score = 1.0 - width / max_width;
                    let jitter = rng.random_range(0.0..1e-6);
                    let stability =
                        0.5 * depth_score + 0.3 * center_score + 0.2 * fit_score + jitter;
                    let _ = d_i;
                    entries.push(GraspEntry {
                        pose: Pose::new(position, rotation),
                        joints: vec![gripper.preshape_half_opening],
                        stability,
                    });
                }
            }
        }
    }
    Ok(GraspDatabase {
        version: DB_FILE_VERSION,
        object: object.name(),
        entries,
    })
}

/// A database entry mapped through an estimated object pose.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspCandidate {
    /// World wrist pose: position = object position + object rotation *
    /// entry position; rotation = object rotation * entry rotation.
    pub pose: Pose,
    pub joints: Vec<f64>,
    pub stability: f64,
    /// Index into the estimated-pose list the candidate was expanded from.
    pub object_index: usize,
    /// Index of the database entry.
    pub entry_index: usize,
}

/// All d*e candidates in (entry, object) lexicographic order.
pub fn expand_candidates(db: &[GraspEntry], object_poses: &[Pose]) -> Vec<GraspCandidate> {
    let mut out = Vec::with_capacity(db.len() * object_poses.len());
    for (i, entry) in db.iter().enumerate() {
        for (j, obj_pose) in object_poses.iter().enumerate() {
            out.push(GraspCandidate {
                pose: obj_pose.compose(&entry.pose),
                joints: entry.joints.clone(),
                stability: entry.stability,
                object_index: j,
                entry_index: i,
            });
        }
    }
    out
}

/// Candidates partitioned into quality tiers: tier 0 holds the highest
/// stability indices, and sizes differ by at most one.
#[derive(Debug, Clone)]
pub struct TierSet {
    pub tiers: Vec<Vec<GraspCandidate>>,
    /// Lower stability bound of each tier but the last.
    pub thresholds: Vec<f64>,
}

impl TierSet {
    pub fn total(&self) -> usize {
        self.tiers.iter().map(Vec::len).sum()
    }
}

/// Splits candidates into `f` tiers at empirical stability quantiles so the
/// tier sizes are as equal as possible; ties are broken by candidate order.
pub fn tier_split(candidates: Vec<GraspCandidate>, f: usize) -> Result<TierSet> {
    if f < 1 {
        return Err(Error::Config("tier count must be >= 1".into()));
    }
    if f > candidates.len() {
        return Err(Error::Config(format!(
            "tier count {f} exceeds candidate count {}",
            candidates.len()
        )));
    }
    let n = candidates.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        candidates[b]
            .stability
            .partial_cmp(&candidates[a].stability)
            .expect("finite stability")
            .then(a.cmp(&b))
    });
    let base = n / f;
    let rem = n % f;
    let mut tiers = Vec::with_capacity(f);
    let mut thresholds = Vec::with_capacity(f - 1);
    let mut cursor = 0usize;
    let mut taken = vec![false; n];
    for k in 0..f {
        let size = base + usize::from(k < rem);
        let chunk: Vec<usize> = order[cursor..cursor + size].to_vec();
        cursor += size;
        if k + 1 < f {
            thresholds.push(candidates[*chunk.last().expect("nonempty tier")].stability);
        }
        for &i in &chunk {
            taken[i] = true;
        }
        tiers.push(chunk);
    }
    debug_assert!(taken.iter().all(|&t| t));
    // materialize in tier order, preserving within-tier quality order
    let mut by_index: Vec<Option<GraspCandidate>> = candidates.into_iter().map(Some).collect();
    let tiers = tiers
        .into_iter()
        .map(|chunk| {
            chunk
                .into_iter()
                .map(|i| by_index[i].take().expect("each candidate used once"))
                .collect()
        })
        .collect();
    Ok(TierSet { tiers, thresholds })
}

/// Reachability stub: a workspace box for the wrist plus the bin geometry
/// the finger corridor must not cross.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachModel {
    pub workspace_min: Point3,
    pub workspace_max: Point3,
    pub bin: Bin,
}

impl ReachModel {
    /// Workspace covering the bin interior and the air above it.
    pub fn over_bin(bin: &Bin) -> Self {
        ReachModel {
            workspace_min: Point3::new(-bin.size_x * 0.5, -bin.size_y * 0.5, 0.0),
            workspace_max: Point3::new(bin.size_x * 0.5, bin.size_y * 0.5, 0.6),
            bin: *bin,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.workspace_min.x < self.workspace_max.x
            && self.workspace_min.y < self.workspace_max.y
            && self.workspace_min.z < self.workspace_max.z
        {
            Ok(())
        } else {
            Err(Error::Config("workspace box is degenerate".into()))
        }
    }

    fn contains(&self, p: &Point3) -> bool {
        p.x >= self.workspace_min.x
            && p.x <= self.workspace_max.x
            && p.y >= self.workspace_min.y
            && p.y <= self.workspace_max.y
            && p.z >= self.workspace_min.z
            && p.z <= self.workspace_max.z
    }
}

/// True iff the wrist lies in the workspace box and the margin-0 finger
/// corridor does not intersect any bin wall.
pub fn check_reachable(
    candidate: &GraspCandidate,
    reach: &ReachModel,
    gripper: &GripperModel,
) -> bool {
    if !reach.contains(&candidate.pose.position) {
        return false;
    }
    let sv = build_swept_volume(
        &candidate.pose,
        GripperModel::approach_axis(),
        GripperModel::closing_axis(),
        gripper,
        0.0,
    )
    .expect("wrist axes are fixed orthonormal unit vectors");
    let corridor = sv.obb(0.0);
    for (wall, pose) in reach.bin.wall_solids() {
        let Shape::Box { size } = wall.shape else {
            unreachable!("bin solids are boxes")
        };
        let wall_obb = crate::geometry::Obb {
            center: pose.position,
            rotation: pose.rotation,
            half_extents: Vec3::new(size[0] * 0.5, size[1] * 0.5, size[2] * 0.5),
        };
        if corridor.intersects(&wall_obb) {
            return false;
        }
    }
    true
}

/// Inputs the selection loop needs besides the candidates themselves.
pub struct SelectionContext<'a> {
    pub cloud: &'a PointCloud,
    pub object: &'a ObjectModel,
    /// Estimated object poses, indexed by `GraspCandidate::object_index`.
    pub object_poses: &'a [Pose],
    /// Swept-volume margin used when gathering feature points.
    pub margin: f64,
    /// Distance threshold for removing target-object points.
    pub removal_threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionMode {
    /// Reachability only; the winner maximizes the stability index.
    Training,
    /// Reachability plus discriminator filtering; the winner maximizes the
    /// selection index.
    Execution,
}

/// Per-tier evaluation counts for the decision trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierTrace {
    pub tier: usize,
    pub candidates: usize,
    /// False for tiers after the one that produced a winner.
    pub evaluated: bool,
    pub reachable: usize,
    /// None in training mode (no discriminator runs).
    pub predicted_success: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SelectedGrasp {
    pub candidate: GraspCandidate,
    /// Value of the ranking index the winner maximized.
    pub score: f64,
    /// Clamped swept points of the winner after target removal, ready for
    /// feature extraction.
    pub swept: Vec<SweptPoint>,
}

#[derive(Debug, Clone)]
pub struct SelectionReport {
    pub chosen: Option<SelectedGrasp>,
    pub tiers: Vec<TierTrace>,
}

struct CandidateEval {
    reachable: bool,
    predicted: bool,
    score: f64,
    swept: Vec<SweptPoint>,
}

/// Tier-by-tier selection: evaluates each tier's candidates (reachability,
/// then in execution mode the discriminator), returns the survivor
/// maximizing the mode's index, and stops at the first tier with a
/// survivor. Ties break toward the lowest (entry, object) pair. Candidate
/// evaluation runs on the rayon pool; results are reduced in deterministic
/// candidate order.
pub fn select_grasp(
    tiers: &TierSet,
    ctx: &SelectionContext,
    discriminator: Option<&(dyn Fn(&[SweptPoint]) -> bool + Sync)>,
    reach: &ReachModel,
    gripper: &GripperModel,
    alpha: f64,
    beta: f64,
    mode: SelectionMode,
) -> SelectionReport {
    let mut traces = Vec::with_capacity(tiers.tiers.len());
    let mut chosen: Option<SelectedGrasp> = None;
    for (k, tier) in tiers.tiers.iter().enumerate() {
        if chosen.is_some() {
            traces.push(TierTrace {
                tier: k + 1,
                candidates: tier.len(),
                evaluated: false,
                reachable: 0,
                predicted_success: None,
            });
            continue;
        }
        let evals: Vec<CandidateEval> = tier
            .par_iter()
            .map(|cand| {
                if !check_reachable(cand, reach, gripper) {
                    return CandidateEval {
                        reachable: false,
                        predicted: false,
                        score: f64::NEG_INFINITY,
                        swept: Vec::new(),
                    };
                }
                let sv = build_swept_volume(
                    &cand.pose,
                    GripperModel::approach_axis(),
                    GripperModel::closing_axis(),
                    gripper,
                    ctx.margin,
                )
                .expect("wrist axes are fixed orthonormal unit vectors");
                let swept = classify_points(ctx.cloud, &sv);
                let swept = remove_target_points(
                    &swept,
                    ctx.cloud,
                    ctx.object,
                    &ctx.object_poses[cand.object_index],
                    ctx.removal_threshold,
                );
                let swept = clamp_nonnegative(&swept);
                let predicted = match (mode, discriminator) {
                    (SelectionMode::Execution, Some(d)) => d(&swept),
                    _ => true,
                };
                let score = match mode {
                    SelectionMode::Training => cand.stability,
                    SelectionMode::Execution => selection_index(&swept, alpha, beta),
                };
                CandidateEval {
                    reachable: true,
                    predicted,
                    score,
                    swept,
                }
            })
            .collect();
        let reachable = evals.iter().filter(|e| e.reachable).count();
        let predicted = evals.iter().filter(|e| e.reachable && e.predicted).count();
        let mut best: Option<(usize, f64)> = None;
        for (i, e) in evals.iter().enumerate() {
            if !(e.reachable && e.predicted) {
                continue;
            }
            let replace = match best {
                None => true,
                Some((bi, bs)) => {
                    let (c, b) = (&tier[i], &tier[bi]);
                    e.score > bs
                        || (e.score == bs
                            && (c.entry_index, c.object_index) < (b.entry_index, b.object_index))
                }
            };
            if replace {
                best = Some((i, e.score));
            }
        }
        if let Some((i, score)) = best {
            chosen = Some(SelectedGrasp {
                candidate: tier[i].clone(),
                score,
                swept: evals[i].swept.clone(),
            });
        }
        traces.push(TierTrace {
            tier: k + 1,
            candidates: tier.len(),
            evaluated: true,
            reachable,
            predicted_success: match mode {
                SelectionMode::Training => None,
                SelectionMode::Execution => Some(predicted),
            },
        });
    }
    SelectionReport {
        chosen,
        tiers: traces,
    }
}
