//! Rule-based quasi-static pick simulator and the dataset/experiment
//! drivers built on it.
//!
//! The oracle supplies ground-truth labels for synthetic trials. Its
//! contact rules deliberately see more than the features do (contact
//! angles, second neighbors), so a discriminator has real structure to
//! learn:
//!
//! 1. No neighbor intersects the margin-0 swept volume: clear pick.
//! 2. A finger first contacts each intruding neighbor at that neighbor's
//!    highest surface point inside the finger corridors (or, if the
//!    neighbor only leans into the closing gap, inside the gap region).
//!    If the inward contact normal cannot push the neighbor away from the
//!    target (angle between escape direction and push >= the configured
//!    maximum), the pick fails.
//! 3. Otherwise the neighbor must have room to move: if translating it
//!    along the escape direction by the push clearance collides with
//!    another object or a bin wall, the pick fails.
//! 4. All intruders pushable with room: success.
//!
//! The model is quasi-static with a single push event per neighbor and no
//! rotation during the push.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{hist_feature, svm_feature, BinningConfig, DatasetRow, Label};
use crate::geometry::{
    build_swept_volume, GripperModel, Point3, Pose, SweptPoint, SweptVolume, Vec3,
};
use crate::learn::TrainedModel;
use crate::plan::{
    expand_candidates, select_grasp, tier_split, GraspCandidate, GraspDatabase, ReachModel,
    SelectionContext, SelectionMode, SelectionReport,
};
use crate::rng::derive_seed;
use crate::scene::{capture, estimate_poses, gen_scene, Bin, BinScene, SensorConfig};
use crate::shape::{self, pair_distance, upright_footprint, ObjectModel, Shape};

/// Why a simulated pick succeeded or failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PickReason {
    Clear,
    NeighborPushedClear,
    BlockedBySecondNeighbor,
    BadContactAngle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PickOutcome {
    pub success: bool,
    pub reason: PickReason,
}

impl PickOutcome {
    fn from_reason(reason: PickReason) -> Self {
        PickOutcome {
            success: matches!(reason, PickReason::Clear | PickReason::NeighborPushedClear),
            reason,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Free space a pushed neighbor needs along its escape direction.
    pub push_clearance: f64,
    /// Largest angle between the escape direction and the inward contact
    /// normal that still counts as a pushable contact.
    pub contact_angle_max: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            push_clearance: 0.015,
            contact_angle_max: 60f64.to_radians(),
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.push_clearance > 0.0 && self.contact_angle_max > 0.0 {
            Ok(())
        } else {
            Err(Error::Config("oracle parameters must be positive".into()))
        }
    }
}

const SAMPLE_SPACING: f64 = 0.002;
const ESCAPE_STEPS: usize = 4;

fn object_intersects_corridor(obj: &ObjectModel, pose: &Pose, sv: &SweptVolume) -> bool {
    let corridor = sv.obb(0.0);
    match obj.shape {
        Shape::Sphere { radius } => corridor.distance_to_point(&pose.position) <= radius,
        Shape::Box { size } => {
            let obb = crate::geometry::Obb {
                center: pose.position,
                rotation: pose.rotation,
                half_extents: Vec3::new(size[0] * 0.5, size[1] * 0.5, size[2] * 0.5),
            };
            corridor.intersects(&obb)
        }
        // conservative: the cylinder's bounding box
        Shape::Cylinder { radius, height } => {
            let obb = crate::geometry::Obb {
                center: pose.position,
                rotation: pose.rotation,
                half_extents: Vec3::new(radius, radius, height * 0.5),
            };
            corridor.intersects(&obb)
        }
    }
}

/// First finger contact on a neighbor during the approach (or closing)
/// motion: the neighbor's highest surface point inside either finger
/// corridor, falling back to the closing-gap region and finally the full
/// corridor footprint. Returns the contact point in world coordinates.
fn first_contact_point(
    neighbor: &ObjectModel,
    pose: &Pose,
    sv: &SweptVolume,
    gripper: &GripperModel,
) -> Option<Point3> {
    let ho = gripper.preshape_half_opening;
    let hy = sv.half_extent_y;
    let z_tol = 1e-9;
    let mut best_finger: Option<(f64, Point3)> = None;
    let mut best_gap: Option<(f64, Point3)> = None;
    let mut best_any: Option<(f64, Point3)> = None;
    for sample in neighbor.surface_points_local(SAMPLE_SPACING) {
        let world = pose.transform_point(&sample);
        let local = sv.to_local(&world);
        if local.x.abs() > sv.half_extent_x || local.z < -z_tol || local.z > sv.extent_z + z_tol {
            continue;
        }
        let ay = local.y.abs();
        if ay > hy {
            continue;
        }
        let key = (local.z, world);
        let better = |cur: &Option<(f64, Point3)>| cur.map_or(true, |(z, _)| local.z > z);
        if ay >= ho {
            if better(&best_finger) {
                best_finger = Some(key);
            }
        } else if local.z <= gripper.finger_length + z_tol {
            if better(&best_gap) {
                best_gap = Some(key);
            }
        }
        if better(&best_any) {
            best_any = Some(key);
        }
    }
    best_finger
        .or(best_gap)
        .or(best_any)
        .map(|(_, world)| world)
}

/// Applies the contact rules to one candidate against the ground-truth
/// scene. `candidate.object_index` must identify the target within
/// `scene.objects`.
pub fn simulate_pick(
    scene: &BinScene,
    candidate: &GraspCandidate,
    gripper: &GripperModel,
    cfg: &OracleConfig,
) -> Result<PickOutcome> {
    cfg.validate()?;
    let target_index = candidate.object_index;
    if target_index >= scene.objects.len() {
        return Err(Error::Input(format!(
            "target object {target_index} not in a scene of {} objects",
            scene.objects.len()
        )));
    }
    let sv = build_swept_volume(
        &candidate.pose,
        GripperModel::approach_axis(),
        GripperModel::closing_axis(),
        gripper,
        0.0,
    )?;
    let target_pose = &scene.objects[target_index].1;
    let intruders: Vec<usize> = scene
        .objects
        .iter()
        .enumerate()
        .filter(|(i, (obj, pose))| *i != target_index && object_intersects_corridor(obj, pose, &sv))
        .map(|(i, _)| i)
        .collect();
    if intruders.is_empty() {
        return Ok(PickOutcome::from_reason(PickReason::Clear));
    }
    for &ni in &intruders {
        let (neighbor, pose) = &scene.objects[ni];
        // escape direction: horizontally away from the target
        let mut u = pose.position - target_pose.position;
        u.z = 0.0;
        let u = if u.norm() > 1e-9 {
            u.normalize()
        } else {
            Vec3::x()
        };
        if let Some(contact) = first_contact_point(neighbor, pose, &sv, gripper) {
            let inward = -neighbor.normal_world(&contact, pose);
            let angle = u.dot(&inward).clamp(-1.0, 1.0).acos();
            if angle >= cfg.contact_angle_max {
                return Ok(PickOutcome::from_reason(PickReason::BadContactAngle));
            }
        }
        // room to move: sweep the neighbor along the escape direction
        for step in 1..=ESCAPE_STEPS {
            let offset = u * (cfg.push_clearance * step as f64 / ESCAPE_STEPS as f64);
            let moved = Pose::new(pose.position + offset, pose.rotation);
            let fp = upright_footprint(neighbor, &moved);
            if !bin_contains(&scene.bin, &fp) {
                return Ok(PickOutcome::from_reason(PickReason::BlockedBySecondNeighbor));
            }
            for (oi, (other, other_pose)) in scene.objects.iter().enumerate() {
                if oi == ni || oi == target_index {
                    continue;
                }
                if pair_distance((neighbor, &moved), (other, other_pose)) < -1e-6 {
                    return Ok(PickOutcome::from_reason(PickReason::BlockedBySecondNeighbor));
                }
            }
        }
    }
    Ok(PickOutcome::from_reason(PickReason::NeighborPushedClear))
}

fn bin_contains(bin: &Bin, fp: &shape::Footprint) -> bool {
    let hx = bin.size_x * 0.5 + 1e-6;
    let hy = bin.size_y * 0.5 + 1e-6;
    match fp {
        shape::Footprint::Disk { center, radius } => {
            center.x - radius >= -hx
                && center.x + radius <= hx
                && center.y - radius >= -hy
                && center.y + radius <= hy
        }
        shape::Footprint::Poly(pts) => pts
            .iter()
            .all(|p| p.x >= -hx && p.x <= hx && p.y >= -hy && p.y <= hy),
    }
}

// ---------------------------------------------------------------------------
// Trial drivers
// ---------------------------------------------------------------------------

/// Everything a synthetic trial needs: scene generation, sensing, grasp
/// database, pose estimation stand-in, feature extraction, and selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub object: ObjectModel,
    pub object_count: usize,
    pub bin: Bin,
    pub adjacency_gap: f64,
    pub sensor: SensorConfig,
    pub gripper: GripperModel,
    pub oracle: OracleConfig,
    pub db_size: usize,
    pub tier_count: usize,
    pub swept_margin: f64,
    pub removal_threshold: f64,
    pub binning: BinningConfig,
    pub pose_sigma_t: f64,
    pub pose_sigma_r: f64,
    pub pose_error_threshold: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            object: ObjectModel::sphere(0.012).expect("valid default object"),
            object_count: 9,
            bin: Bin::default(),
            adjacency_gap: crate::scene::DEFAULT_ADJACENCY_GAP,
            sensor: SensorConfig {
                angular_resolution: 0.005,
                ..SensorConfig::default()
            },
            // proportioned to the default object so the finger corridor does
            // not swallow the whole neighborhood
            gripper: GripperModel {
                finger_length: 0.04,
                finger_thickness: 0.006,
                finger_width: 0.016,
                preshape_half_opening: 0.016,
                approach_stroke: 0.04,
            },
            oracle: OracleConfig::default(),
            db_size: 172,
            tier_count: 3,
            swept_margin: crate::geometry::DEFAULT_SWEPT_MARGIN,
            removal_threshold: crate::geometry::DEFAULT_TARGET_REMOVAL_THRESHOLD,
            binning: BinningConfig::default(),
            pose_sigma_t: 0.002,
            pose_sigma_r: 0.02,
            pose_error_threshold: crate::scene::DEFAULT_POSE_ERROR_THRESHOLD,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.bin.validate()?;
        self.sensor.validate()?;
        self.gripper.validate()?;
        self.oracle.validate()?;
        self.binning.validate()?;
        if self.object_count < 1 {
            return Err(Error::Usage("object count must be >= 1".into()));
        }
        if self.db_size < 1 || self.tier_count < 1 {
            return Err(Error::Config("db size and tier count must be >= 1".into()));
        }
        Ok(())
    }
}

/// Success predicate over swept points for a trained model, for use as the
/// selection discriminator.
pub fn discriminator_fn<'a>(
    model: &'a TrainedModel,
    binning: &'a BinningConfig,
) -> impl Fn(&[SweptPoint]) -> bool + Sync + 'a {
    move |swept: &[SweptPoint]| {
        let features = match model.kind() {
            crate::learn::FeatureKind::Svm2d => svm_feature(swept).as_array().to_vec(),
            crate::learn::FeatureKind::Hist => hist_feature(swept, binning).as_f64_vec(),
        };
        matches!(model.predict(&features), Ok(Label::Success))
    }
}

/// Capture, pose estimation, candidate expansion, tiering, and selection
/// for one scene. Returns the selection report plus the estimated-pose
/// index mapping back into the scene.
pub fn run_pick_selection(
    scene: &BinScene,
    db: &GraspDatabase,
    model: Option<&TrainedModel>,
    cfg: &PipelineConfig,
    alpha: f64,
    beta: f64,
    mode: SelectionMode,
    seed: u64,
) -> Result<(SelectionReport, Vec<usize>)> {
    cfg.validate()?;
    let cloud = capture(scene, &cfg.sensor, derive_seed(seed, 1));
    let mut estimated = estimate_poses(
        scene,
        cfg.pose_sigma_t,
        cfg.pose_sigma_r,
        cfg.pose_error_threshold,
        derive_seed(seed, 2),
    );
    // a pose estimator returns objects in no meaningful order; randomizing
    // it here keeps stability ties from always selecting the same object
    {
        use rand::seq::SliceRandom;
        estimated.shuffle(&mut crate::rng::seeded_rng(derive_seed(seed, 3)));
    }
    if estimated.is_empty() {
        return Ok((
            SelectionReport {
                chosen: None,
                tiers: Vec::new(),
            },
            Vec::new(),
        ));
    }
    let poses: Vec<Pose> = estimated.iter().map(|(p, _)| *p).collect();
    let scene_indices: Vec<usize> = estimated.iter().map(|(_, i)| *i).collect();
    let candidates = expand_candidates(&db.entries, &poses);
    let tiers = tier_split(candidates, cfg.tier_count)?;
    let reach = ReachModel::over_bin(&scene.bin);
    let ctx = SelectionContext {
        cloud: &cloud,
        object: &cfg.object,
        object_poses: &poses,
        margin: cfg.swept_margin,
        removal_threshold: cfg.removal_threshold,
    };
    let report = match model {
        Some(m) => {
            let disc = discriminator_fn(m, &cfg.binning);
            select_grasp(&tiers, &ctx, Some(&disc), &reach, &cfg.gripper, alpha, beta, mode)
        }
        None => select_grasp(&tiers, &ctx, None, &reach, &cfg.gripper, alpha, beta, mode),
    };
    Ok((report, scene_indices))
}

/// One training trial on an existing scene: select with the stability index
/// only (alpha = beta = 0, no discriminator), extract both features from the
/// winner's swept points, and label with the oracle. `None` when nothing was
/// selectable.
pub fn run_training_trial(
    scene: &BinScene,
    db: &GraspDatabase,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<Option<(DatasetRow, PickOutcome)>> {
    let (report, scene_indices) =
        run_pick_selection(scene, db, None, cfg, 0.0, 0.0, SelectionMode::Training, seed)?;
    let Some(selected) = report.chosen else {
        return Ok(None);
    };
    let mut oracle_candidate = selected.candidate.clone();
    oracle_candidate.object_index = scene_indices[selected.candidate.object_index];
    let outcome = simulate_pick(scene, &oracle_candidate, &cfg.gripper, &cfg.oracle)?;
    let row = DatasetRow {
        label: if outcome.success {
            Label::Success
        } else {
            Label::Failure
        },
        svm: svm_feature(&selected.swept),
        hist: hist_feature(&selected.swept, &cfg.binning),
    };
    Ok(Some((row, outcome)))
}

/// One execution trial on a freshly generated scene: select with the
/// discriminator (if any) and the selection index, then measure the oracle
/// outcome. `None` means the pick was abstained.
pub fn run_execution_trial(
    cfg: &PipelineConfig,
    db: &GraspDatabase,
    model: Option<&TrainedModel>,
    alpha: f64,
    beta: f64,
    seed: u64,
) -> Result<Option<PickOutcome>> {
    let scene = gen_scene(
        &cfg.object,
        cfg.object_count,
        &cfg.bin,
        cfg.adjacency_gap,
        derive_seed(seed, 10),
    )?;
    let (report, scene_indices) = run_pick_selection(
        &scene,
        db,
        model,
        cfg,
        alpha,
        beta,
        SelectionMode::Execution,
        derive_seed(seed, 11),
    )?;
    let Some(selected) = report.chosen else {
        return Ok(None);
    };
    let mut oracle_candidate = selected.candidate.clone();
    oracle_candidate.object_index = scene_indices[selected.candidate.object_index];
    Ok(Some(simulate_pick(
        &scene,
        &oracle_candidate,
        &cfg.gripper,
        &cfg.oracle,
    )?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub success: usize,
    pub failure: usize,
    pub trial_seeds: Vec<u64>,
    pub attempts: usize,
}

/// Generates `n_trials` labeled rows, one per training trial on a freshly
/// generated scene, retrying unselectable scenes with new derived seeds.
/// Deterministic per seed; reruns produce identical rows and stats.
pub fn generate_dataset(
    n_trials: usize,
    cfg: &PipelineConfig,
    seed: u64,
) -> Result<(Vec<DatasetRow>, DatasetStats)> {
    if n_trials < 1 {
        return Err(Error::Usage("trial count must be >= 1".into()));
    }
    cfg.validate()?;
    let db = crate::plan::generate_grasp_db(&cfg.object, &cfg.gripper, cfg.db_size, derive_seed(seed, 0))?;
    let mut rows = Vec::with_capacity(n_trials);
    let mut stats = DatasetStats {
        success: 0,
        failure: 0,
        trial_seeds: Vec::with_capacity(n_trials),
        attempts: 0,
    };
    let max_attempts = n_trials.saturating_mul(20);
    for attempt in 0..max_attempts {
        if rows.len() == n_trials {
            break;
        }
        stats.attempts = attempt + 1;
        let trial_seed = derive_seed(seed, 100 + attempt as u64);
        let scene = gen_scene(
            &cfg.object,
            cfg.object_count,
            &cfg.bin,
            cfg.adjacency_gap,
            derive_seed(trial_seed, 0),
        )?;
        if let Some((row, outcome)) = run_training_trial(&scene, &db, cfg, derive_seed(trial_seed, 1))? {
            if outcome.success {
                stats.success += 1;
            } else {
                stats.failure += 1;
            }
            stats.trial_seeds.push(trial_seed);
            rows.push(row);
        }
    }
    if rows.len() < n_trials {
        return Err(Error::Capacity(format!(
            "only {} of {n_trials} trials produced a selectable grasp",
            rows.len()
        )));
    }
    Ok((rows, stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentStats {
    pub trials: usize,
    pub attempted: usize,
    pub succeeded: usize,
    pub abstained: usize,
}

impl ExperimentStats {
    /// Success rate over executed (non-abstained) picks.
    pub fn success_rate(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.succeeded as f64 / self.attempted as f64
        }
    }
}

/// Runs `n_trials` execution trials and tallies outcomes. With `model =
/// None` and alpha = beta = 0 this is the undiscriminating baseline.
pub fn run_experiment(
    cfg: &PipelineConfig,
    db: &GraspDatabase,
    model: Option<&TrainedModel>,
    alpha: f64,
    beta: f64,
    n_trials: usize,
    seed: u64,
) -> Result<ExperimentStats> {
    let mut stats = ExperimentStats {
        trials: n_trials,
        attempted: 0,
        succeeded: 0,
        abstained: 0,
    };
    for t in 0..n_trials {
        match run_execution_trial(cfg, db, model, alpha, beta, derive_seed(seed, t as u64))? {
            Some(outcome) => {
                stats.attempted += 1;
                if outcome.success {
                    stats.succeeded += 1;
                }
            }
            None => stats.abstained += 1,
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use nalgebra::Rotation3;
    use rand::Rng;

    fn sphere_obj() -> ObjectModel {
        ObjectModel::sphere(0.012).unwrap()
    }

    fn upright(x: f64, y: f64, z: f64) -> Pose {
        Pose::new(Point3::new(x, y, z), Rotation3::identity())
    }

    /// Top-down candidate grasping scene object `target` dead center.
    fn top_down_candidate(scene: &BinScene, target: usize, depth_frac: f64) -> GraspCandidate {
        let (obj, pose) = &scene.objects[target];
        let hh = obj.half_height();
        let tip_z = pose.position.z - hh + 2.0 * hh * depth_frac;
        GraspCandidate {
            pose: Pose::new(
                Point3::new(
                    pose.position.x,
                    pose.position.y,
                    tip_z + GripperModel::default().finger_length,
                ),
                Rotation3::identity(),
            ),
            joints: vec![0.03],
            stability: 1.0,
            object_index: target,
            entry_index: 0,
        }
    }

    fn scene_with(objects: Vec<(ObjectModel, Pose)>) -> BinScene {
        BinScene {
            bin: Bin::default(),
            objects,
            seed: 0,
        }
    }

    #[test]
    fn isolated_target_is_clear() {
        let r = 0.012;
        let scene = scene_with(vec![(sphere_obj(), upright(0.0, 0.0, r))]);
        let cand = top_down_candidate(&scene, 0, 0.4);
        let out = simulate_pick(&scene, &cand, &GripperModel::default(), &OracleConfig::default())
            .unwrap();
        assert_eq!(out.reason, PickReason::Clear);
        assert!(out.success);
    }

    #[test]
    fn far_side_neighbor_with_room_is_pushed_clear() {
        let r = 0.012;
        // neighbor's center beyond the finger corridor's outer face, so the
        // finger grazes a steep part of its near shoulder and pushes it
        // outward
        let scene = scene_with(vec![
            (sphere_obj(), upright(0.0, 0.0, r)),
            (sphere_obj(), upright(0.0, 0.049, r)),
        ]);
        let cand = top_down_candidate(&scene, 0, 0.4);
        let out = simulate_pick(&scene, &cand, &GripperModel::default(), &OracleConfig::default())
            .unwrap();
        assert_eq!(out.reason, PickReason::NeighborPushedClear);
        assert!(out.success);
    }

    #[test]
    fn neighbor_under_finger_center_fails_on_contact_angle() {
        let r = 0.012;
        // neighbor centered under a finger corridor: the finger lands on its
        // apex, the inward normal points straight down
        let scene = scene_with(vec![
            (sphere_obj(), upright(0.0, 0.0, r)),
            (sphere_obj(), upright(0.0, 0.035, r)),
        ]);
        let cand = top_down_candidate(&scene, 0, 0.4);
        let out = simulate_pick(&scene, &cand, &GripperModel::default(), &OracleConfig::default())
            .unwrap();
        assert_eq!(out.reason, PickReason::BadContactAngle);
        assert!(!out.success);
    }

    #[test]
    fn flanked_neighbor_is_blocked() {
        let r = 0.012;
        // pushable neighbor with a second object hard against its far side
        let scene = scene_with(vec![
            (sphere_obj(), upright(0.0, 0.0, r)),
            (sphere_obj(), upright(0.0, 0.049, r)),
            (sphere_obj(), upright(0.0, 0.0735, r)),
        ]);
        let cand = top_down_candidate(&scene, 0, 0.4);
        let out = simulate_pick(&scene, &cand, &GripperModel::default(), &OracleConfig::default())
            .unwrap();
        assert_eq!(out.reason, PickReason::BlockedBySecondNeighbor);
        assert!(!out.success);

        // removing the blocker turns the pick successful
        let relaxed = scene_with(vec![scene.objects[0].clone(), scene.objects[1].clone()]);
        let out = simulate_pick(&relaxed, &cand, &GripperModel::default(), &OracleConfig::default())
            .unwrap();
        assert!(out.success);
    }

    #[test]
    fn wall_blocks_escape() {
        let r = 0.012;
        let bin = Bin::default();
        let wall_y = bin.size_y * 0.5;
        // neighbor sits against the wall; pushing it outward has no room
        let neighbor_y = wall_y - r - 0.0005;
        let scene = scene_with(vec![
            (sphere_obj(), upright(0.0, neighbor_y - 0.049, r)),
            (sphere_obj(), upright(0.0, neighbor_y, r)),
        ]);
        let cand = top_down_candidate(&scene, 0, 0.4);
        let out = simulate_pick(&scene, &cand, &GripperModel::default(), &OracleConfig::default())
            .unwrap();
        assert_eq!(out.reason, PickReason::BlockedBySecondNeighbor);
    }

    #[test]
    fn target_not_in_scene_is_an_input_error() {
        let scene = scene_with(vec![(sphere_obj(), upright(0.0, 0.0, 0.012))]);
        let mut cand = top_down_candidate(&scene, 0, 0.4);
        cand.object_index = 5;
        assert!(matches!(
            simulate_pick(&scene, &cand, &GripperModel::default(), &OracleConfig::default()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn reason_success_consistency_and_determinism_on_random_scenes() {
        let cfg = PipelineConfig::default();
        let db = crate::plan::generate_grasp_db(&cfg.object, &cfg.gripper, 24, 3).unwrap();
        let mut labeled = 0;
        for s in 0..30 {
            let scene = gen_scene(&cfg.object, 6, &cfg.bin, cfg.adjacency_gap, 1000 + s).unwrap();
            let Some((row, outcome)) = run_training_trial(&scene, &db, &cfg, 2000 + s).unwrap()
            else {
                continue;
            };
            labeled += 1;
            assert_eq!(
                outcome.success,
                matches!(outcome.reason, PickReason::Clear | PickReason::NeighborPushedClear)
            );
            assert_eq!(row.label == Label::Success, outcome.success);
            // deterministic rerun
            let again = run_training_trial(&scene, &db, &cfg, 2000 + s).unwrap().unwrap();
            assert_eq!(again.0, row);
            assert_eq!(again.1, outcome);
        }
        assert!(labeled >= 25, "only {labeled} trials labeled");
    }

    #[test]
    fn removing_nontarget_objects_never_breaks_success() {
        // success must be monotone in obstacle removal
        let cfg = PipelineConfig::default();
        let gripper = GripperModel::default();
        let mut checked = 0;
        for s in 0..110 {
            let scene = gen_scene(&cfg.object, 5, &cfg.bin, cfg.adjacency_gap, 5000 + s).unwrap();
            for target in 0..scene.objects.len() {
                let cand = top_down_candidate(&scene, target, 0.4);
                let out = simulate_pick(&scene, &cand, &gripper, &cfg.oracle).unwrap();
                if !out.success {
                    continue;
                }
                checked += 1;
                for removed in 0..scene.objects.len() {
                    if removed == target {
                        continue;
                    }
                    let objects: Vec<_> = scene
                        .objects
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != removed)
                        .map(|(_, o)| o.clone())
                        .collect();
                    let mut reduced_cand = cand.clone();
                    if removed < target {
                        reduced_cand.object_index = target - 1;
                    }
                    let reduced = BinScene {
                        bin: scene.bin,
                        objects,
                        seed: 0,
                    };
                    let out2 = simulate_pick(&reduced, &reduced_cand, &gripper, &cfg.oracle).unwrap();
                    assert!(
                        out2.success,
                        "seed {s}: removing object {removed} flipped success to {:?}",
                        out2.reason
                    );
                }
            }
        }
        assert!(checked >= 100, "only {checked} successful base picks");
    }

    #[test]
    fn outcome_invariant_under_yaw_and_translation() {
        // big bin so walls stay irrelevant; transform = rotation about z
        // plus an xy translation applied to every pose
        let big_bin = Bin {
            size_x: 2.0,
            size_y: 2.0,
            wall_height: 0.05,
        };
        let cfg = PipelineConfig::default();
        let gripper = GripperModel::default();
        let mut rng = seeded_rng(77);
        let mut flips = 0;
        let mut total = 0;
        for s in 0..40 {
            let mut scene = gen_scene(&cfg.object, 5, &Bin::default(), cfg.adjacency_gap, 8000 + s)
                .unwrap();
            scene.bin = big_bin;
            let cand = top_down_candidate(&scene, 0, 0.4);
            let base = simulate_pick(&scene, &cand, &gripper, &cfg.oracle).unwrap();

            let yaw: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let shift = Vec3::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), 0.0);
            let rot = Rotation3::from_axis_angle(&Vec3::z_axis(), yaw);
            let xform = |p: &Pose| Pose::new(Point3::from(rot * p.position.coords + shift), rot * p.rotation);
            let moved = BinScene {
                bin: big_bin,
                objects: scene
                    .objects
                    .iter()
                    .map(|(o, p)| (*o, xform(p)))
                    .collect(),
                seed: 0,
            };
            let moved_cand = GraspCandidate {
                pose: xform(&cand.pose),
                ..cand.clone()
            };
            let out = simulate_pick(&moved, &moved_cand, &gripper, &cfg.oracle).unwrap();
            total += 1;
            if out.reason != base.reason {
                flips += 1;
            }
        }
        assert_eq!(flips, 0, "{flips} of {total} outcomes changed under rigid motion");
    }

    #[test]
    fn dataset_generation_is_deterministic_and_balanced() {
        let cfg = PipelineConfig {
            object_count: 6,
            ..PipelineConfig::default()
        };
        let (rows, stats) = generate_dataset(40, &cfg, 42).unwrap();
        assert_eq!(rows.len(), 40);
        assert_eq!(stats.success + stats.failure, 40);
        assert_eq!(stats.trial_seeds.len(), 40);
        // both classes occur at this scale
        assert!(stats.success > 0, "no successes in 40 trials");
        assert!(stats.failure > 0, "no failures in 40 trials");
        let (rows2, stats2) = generate_dataset(40, &cfg, 42).unwrap();
        assert_eq!(rows, rows2);
        assert_eq!(stats, stats2);
    }
}
