//! Synthetic bin scenes and the sensing front end: scene generation with
//! kinematic settling, virtual depth capture with occlusion, Euclidean
//! clustering, bounding-box filtering, and pose-noise injection standing in
//! for an external pose estimator.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{Point2, Rotation3};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud, Pose, Vec3};
use crate::rng::{derive_seed, seeded_rng};
use crate::shape::{
    self, footprint_distance, pair_distance, upright_footprint, vertical_interval, world_aabb,
    Footprint, ObjectModel,
};

/// Wall thickness of the synthetic bin solids.
pub const BIN_WALL_THICKNESS: f64 = 0.01;
/// Default Euclidean clustering distance.
pub const DEFAULT_CLUSTER_DIST: f64 = 0.01;
/// Poses whose injected translational error exceeds this are discarded.
pub const DEFAULT_POSE_ERROR_THRESHOLD: f64 = 0.007;
/// Default maximum gap between a newly placed object and the pile.
pub const DEFAULT_ADJACENCY_GAP: f64 = 0.01;

/// Open-top bin: interior floor rectangle centered at the origin with the
/// floor at z = 0, walls rising to `wall_height`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub size_x: f64,
    pub size_y: f64,
    pub wall_height: f64,
}

impl Default for Bin {
    fn default() -> Self {
        Bin {
            size_x: 0.22,
            size_y: 0.18,
            wall_height: 0.05,
        }
    }
}

impl Bin {
    pub fn validate(&self) -> Result<()> {
        if self.size_x > 0.0 && self.size_y > 0.0 && self.wall_height > 0.0 {
            Ok(())
        } else {
            Err(Error::Config("bin dimensions must be positive".into()))
        }
    }

    /// Floor and wall solids as posed boxes, for ray casting and collision.
    pub fn solids(&self) -> Vec<(ObjectModel, Pose)> {
        let t = BIN_WALL_THICKNESS;
        let (sx, sy, h) = (self.size_x, self.size_y, self.wall_height);
        let mk = |dx: f64, dy: f64, dz: f64, x: f64, y: f64, z: f64| {
            (
                ObjectModel::boxed(dx, dy, dz).expect("bin solid dims"),
                Pose::new(Point3::new(x, y, z), Rotation3::identity()),
            )
        };
        vec![
            // floor slab, top face at z = 0
            mk(sx + 2.0 * t, sy + 2.0 * t, t, 0.0, 0.0, -t * 0.5),
            // walls
            mk(t, sy + 2.0 * t, h, sx * 0.5 + t * 0.5, 0.0, h * 0.5),
            mk(t, sy + 2.0 * t, h, -(sx * 0.5 + t * 0.5), 0.0, h * 0.5),
            mk(sx + 2.0 * t, t, h, 0.0, sy * 0.5 + t * 0.5, h * 0.5),
            mk(sx + 2.0 * t, t, h, 0.0, -(sy * 0.5 + t * 0.5), h * 0.5),
        ]
    }

    /// Wall solids only (no floor).
    pub fn wall_solids(&self) -> Vec<(ObjectModel, Pose)> {
        self.solids().into_iter().skip(1).collect()
    }

    fn contains_footprint(&self, fp: &Footprint, slack: f64) -> bool {
        let (hx, hy) = (self.size_x * 0.5 + slack, self.size_y * 0.5 + slack);
        match fp {
            Footprint::Disk { center, radius } => {
                center.x - radius >= -hx
                    && center.x + radius <= hx
                    && center.y - radius >= -hy
                    && center.y + radius <= hy
            }
            Footprint::Poly(pts) => pts
                .iter()
                .all(|p| p.x >= -hx && p.x <= hx && p.y >= -hy && p.y <= hy),
        }
    }
}

/// A bin with settled objects. Generated scenes keep every object upright
/// (rotated only about world z), resting on the floor or on other objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinScene {
    pub bin: Bin,
    pub objects: Vec<(ObjectModel, Pose)>,
    pub seed: u64,
}

const SCENE_FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SceneFile {
    version: u32,
    bin: Bin,
    objects: Vec<(ObjectModel, Pose)>,
    seed: u64,
}

impl BinScene {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = SceneFile {
            version: SCENE_FILE_VERSION,
            bin: self.bin,
            objects: self.objects.clone(),
            seed: self.seed,
        };
        let text = serde_json::to_string_pretty(&file)
            .map_err(|e| Error::parse(path.as_ref(), e.to_string()))?;
        std::fs::write(path.as_ref(), text + "\n").map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: SceneFile =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        if file.version != SCENE_FILE_VERSION {
            return Err(Error::parse(
                path,
                format!("unsupported scene file version {}", file.version),
            ));
        }
        let scene = BinScene {
            bin: file.bin,
            objects: file.objects,
            seed: file.seed,
        };
        scene.bin.validate()?;
        Ok(scene)
    }

    /// Checks the scene invariants: nothing below the floor, no pairwise
    /// interpenetration beyond 1e-6.
    pub fn validate(&self) -> Result<()> {
        for (i, (obj, pose)) in self.objects.iter().enumerate() {
            let (lo, _) = world_aabb(obj, pose);
            if lo.z < -1e-6 {
                return Err(Error::Input(format!("object {i} below the bin floor")));
            }
        }
        for i in 0..self.objects.len() {
            for j in (i + 1)..self.objects.len() {
                let (a, pa) = &self.objects[i];
                let (b, pb) = &self.objects[j];
                if shape::is_upright(pa) && shape::is_upright(pb) {
                    let d = pair_distance((a, pa), (b, pb));
                    if d < -1e-6 {
                        return Err(Error::Input(format!(
                            "objects {i} and {j} interpenetrate ({d:.2e})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Rest height (object center z) for a shape dropped straight down at a
/// fixed horizontal position, stopping at the first contact with the floor
/// or an already placed object.
fn drop_center_z(obj: &ObjectModel, xy_yaw: (f64, f64, f64), placed: &[(ObjectModel, Pose)]) -> f64 {
    let (x, y, yaw) = xy_yaw;
    let hh = obj.half_height();
    let probe = Pose::new(
        Point3::new(x, y, hh),
        Rotation3::from_axis_angle(&Vec3::z_axis(), yaw),
    );
    let own_fp = upright_footprint(obj, &probe);
    let own_sphere = matches!(obj.shape, shape::Shape::Sphere { .. });
    let mut z = hh; // resting on the floor
    for (other, other_pose) in placed {
        let other_sphere = matches!(other.shape, shape::Shape::Sphere { .. });
        let (_, other_top) = vertical_interval(other, other_pose);
        let candidate = match (own_sphere, other_sphere) {
            (false, false) => {
                // prism on prism: rests on top only when footprints overlap
                let d2 = footprint_distance(&own_fp, &upright_footprint(other, other_pose));
                if d2 < -1e-12 {
                    Some(other_top + hh)
                } else {
                    None
                }
            }
            (true, false) => {
                // sphere dropping onto a prism
                let r = obj.horizontal_radius();
                let hd = point_to_footprint(
                    Point2::new(x, y),
                    &upright_footprint(other, other_pose),
                )
                .max(0.0);
                if hd < r {
                    Some(other_top + (r * r - hd * hd).sqrt())
                } else {
                    None
                }
            }
            (false, true) => {
                // prism dropping onto a sphere
                let r = other.horizontal_radius();
                let c = other_pose.position;
                let hd = point_to_footprint(Point2::new(c.x, c.y), &own_fp).max(0.0);
                if hd < r {
                    Some(c.z + (r * r - hd * hd).sqrt() + hh)
                } else {
                    None
                }
            }
            (true, true) => {
                let ra = obj.horizontal_radius();
                let rb = other.horizontal_radius();
                let c = other_pose.position;
                let hd = ((x - c.x).powi(2) + (y - c.y).powi(2)).sqrt();
                let rr = ra + rb;
                if hd < rr {
                    Some(c.z + (rr * rr - hd * hd).sqrt())
                } else {
                    None
                }
            }
        };
        if let Some(zc) = candidate {
            z = z.max(zc);
        }
    }
    z
}

fn point_to_footprint(p: Point2<f64>, fp: &Footprint) -> f64 {
    match fp {
        Footprint::Disk { center, radius } => (p - center).norm() - radius,
        Footprint::Poly(poly) => shape::point_poly_distance(p, poly),
    }
}

/// Generates a settled pile of `count` identical objects. Objects drop
/// straight down and stop at the first contact; after the first object each
/// new one must come to rest within `gap_max` of the existing pile.
/// Deterministic per seed.
pub fn gen_scene(
    object: &ObjectModel,
    count: usize,
    bin: &Bin,
    gap_max: f64,
    seed: u64,
) -> Result<BinScene> {
    bin.validate()?;
    if count < 1 {
        return Err(Error::Usage("object count must be >= 1".into()));
    }
    if gap_max < 0.0 {
        return Err(Error::Config("adjacency gap must be nonnegative".into()));
    }
    let hr = object.horizontal_radius();
    if 2.0 * hr >= bin.size_x.min(bin.size_y) {
        return Err(Error::Capacity("object does not fit in the bin".into()));
    }
    const MAX_ATTEMPTS: usize = 600;
    let mut rng = seeded_rng(seed);
    let mut placed: Vec<(ObjectModel, Pose)> = Vec::with_capacity(count);
    for k in 0..count {
        let mut ok = false;
        for _ in 0..MAX_ATTEMPTS {
            let (x, y) = if k == 0 {
                (
                    rng.random_range(-(bin.size_x * 0.5 - hr)..(bin.size_x * 0.5 - hr)),
                    rng.random_range(-(bin.size_y * 0.5 - hr)..(bin.size_y * 0.5 - hr)),
                )
            } else {
                let anchor = &placed[rng.random_range(0..placed.len())].1.position;
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                // window spans overlap (stacking) through gap_max of lateral
                // clearance, biased toward side-by-side contact
                let rho = rng.random_range((1.7 * hr)..(2.0 * hr + gap_max));
                (anchor.x + rho * theta.cos(), anchor.y + rho * theta.sin())
            };
            let yaw = rng.random_range(0.0..std::f64::consts::TAU);
            let z = drop_center_z(object, (x, y, yaw), &placed);
            let pose = Pose::new(
                Point3::new(x, y, z),
                Rotation3::from_axis_angle(&Vec3::z_axis(), yaw),
            );
            // inside the bin
            let fp = upright_footprint(object, &pose);
            if !bin.contains_footprint(&fp, 0.0) {
                continue;
            }
            // clearance and adjacency against the pile
            let mut min_dist = f64::INFINITY;
            for (other, other_pose) in &placed {
                min_dist = min_dist.min(pair_distance((object, &pose), (other, other_pose)));
            }
            if min_dist < -1e-6 {
                continue;
            }
            if k > 0 && min_dist > gap_max {
                continue;
            }
            placed.push((*object, pose));
            ok = true;
            break;
        }
        if !ok {
            return Err(Error::Capacity(format!(
                "could not place object {} of {count} after {MAX_ATTEMPTS} attempts",
                k + 1
            )));
        }
    }
    Ok(BinScene {
        bin: *bin,
        objects: placed,
        seed,
    })
}

/// Virtual depth sensor: a pinhole ray fan from a fixed viewpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    /// Camera pose; the optical axis is the local +z axis.
    pub viewpoint: Pose,
    /// Angular cell size, radians.
    pub angular_resolution: f64,
    /// Full field of view on both axes, radians.
    pub fov: f64,
    /// Standard deviation of Gaussian depth noise along the ray, meters.
    pub noise_sigma: f64,
    pub max_range: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        // straight-down view from half a meter above the bin center
        let rotation = Rotation3::from_axis_angle(&Vec3::x_axis(), std::f64::consts::PI);
        SensorConfig {
            viewpoint: Pose::new(Point3::new(0.0, 0.0, 0.5), rotation),
            angular_resolution: 0.0035,
            fov: 0.7,
            noise_sigma: 0.0005,
            max_range: 2.0,
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.angular_resolution > 0.0
            && self.fov > 0.0
            && self.noise_sigma >= 0.0
            && self.max_range > 0.0
        {
            Ok(())
        } else {
            Err(Error::Config("sensor parameters out of range".into()))
        }
    }
}

/// Casts one ray per angular cell, keeps the first hit (occlusion), applies
/// Gaussian depth noise, and returns the world-frame cloud. Deterministic
/// per seed.
pub fn capture(scene: &BinScene, sensor: &SensorConfig, seed: u64) -> PointCloud {
    let mut geoms = scene.objects.clone();
    geoms.extend(scene.bin.solids());
    let n = ((sensor.fov / sensor.angular_resolution).round() as usize).max(1);
    let mut rng = seeded_rng(seed);
    let noise = if sensor.noise_sigma > 0.0 {
        Some(Normal::new(0.0, sensor.noise_sigma).expect("valid sigma"))
    } else {
        None
    };
    let origin = sensor.viewpoint.position;
    let mut points = Vec::new();
    for iv in 0..n {
        let v = (iv as f64 + 0.5) * sensor.angular_resolution - sensor.fov * 0.5;
        for iu in 0..n {
            let u = (iu as f64 + 0.5) * sensor.angular_resolution - sensor.fov * 0.5;
            let dir_local = Vec3::new(u.tan(), v.tan(), 1.0).normalize();
            let dir = sensor.viewpoint.transform_vector(&dir_local);
            let mut t_hit = f64::INFINITY;
            for (obj, pose) in &geoms {
                if let Some(t) = obj.ray_cast_world(&origin, &dir, pose) {
                    t_hit = t_hit.min(t);
                }
            }
            if t_hit <= sensor.max_range {
                let t = match &noise {
                    Some(dist) => t_hit + dist.sample(&mut rng),
                    None => t_hit,
                };
                points.push(origin + dir * t);
            }
        }
    }
    PointCloud::new("world", points)
}

/// A cluster of cloud point indices with its axis-aligned bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// Ascending, unique indices into the source cloud.
    pub indices: Vec<usize>,
    pub bbox_min: Point3,
    pub bbox_max: Point3,
}

impl Segment {
    pub fn extents(&self) -> Vec3 {
        self.bbox_max - self.bbox_min
    }

    pub fn centroid(&self, cloud: &PointCloud) -> Point3 {
        let mut acc = Vec3::zeros();
        for &i in &self.indices {
            acc += cloud.points[i].coords;
        }
        Point3::from(acc / self.indices.len() as f64)
    }
}

/// Euclidean clustering: connected components of the graph linking points
/// within `cluster_dist`, via a uniform grid as the spatial index. Output
/// segments are disjoint, exhaustive, and ordered by their lowest member
/// index.
pub fn segment(cloud: &PointCloud, cluster_dist: f64) -> Vec<Segment> {
    assert!(cluster_dist > 0.0, "cluster distance must be positive");
    let n = cloud.points.len();
    if n == 0 {
        return Vec::new();
    }
    let cell = cluster_dist;
    let key = |p: &Point3| {
        (
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in cloud.points.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    // union-find
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let d2 = cluster_dist * cluster_dist;
    for (i, p) in cloud.points.iter().enumerate() {
        let (kx, ky, kz) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(cellpts) = grid.get(&(kx + dx, ky + dy, kz + dz)) {
                        for &j in cellpts {
                            if j < i && (cloud.points[j] - p).norm_squared() <= d2 {
                                let ri = find(&mut parent, i);
                                let rj = find(&mut parent, j);
                                if ri != rj {
                                    parent[ri] = rj;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut order: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        let entry = groups.entry(r).or_default();
        if entry.is_empty() {
            order.push(r);
        }
        entry.push(i);
    }
    order
        .into_iter()
        .map(|r| {
            let indices = groups.remove(&r).expect("group exists");
            let mut lo = cloud.points[indices[0]];
            let mut hi = lo;
            for &i in &indices {
                let p = cloud.points[i];
                lo = Point3::new(lo.x.min(p.x), lo.y.min(p.y), lo.z.min(p.z));
                hi = Point3::new(hi.x.max(p.x), hi.y.max(p.y), hi.z.max(p.z));
            }
            Segment {
                indices,
                bbox_min: lo,
                bbox_max: hi,
            }
        })
        .collect()
}

/// Keeps segments whose sorted bounding-box extents are elementwise within
/// `rel_tol` (relative to the object extents) of the object's sorted
/// canonical extents. Sorting grants robustness to axis-aligned rotations.
pub fn bbox_filter(segments: &[Segment], object: &ObjectModel, rel_tol: f64) -> Vec<Segment> {
    assert!(rel_tol > 0.0 && rel_tol < 1.0, "rel_tol must be in (0, 1)");
    let mut obj_ext = [0.0f64; 3];
    let e = object.bbox_extents();
    obj_ext.copy_from_slice(&[e.x, e.y, e.z]);
    obj_ext.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    segments
        .iter()
        .filter(|seg| {
            let se = seg.extents();
            let mut seg_ext = [se.x, se.y, se.z];
            seg_ext.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            seg_ext
                .iter()
                .zip(obj_ext.iter())
                .all(|(s, o)| (s - o).abs() <= rel_tol * o)
        })
        .cloned()
        .collect()
}

/// Perturbs a pose with Gaussian translation noise (per-axis `sigma_t`) and
/// a Gaussian rotation-vector wobble (per-axis `sigma_r`). Returns the noisy
/// pose and the translational error norm; callers discard poses whose error
/// exceeds their threshold.
pub fn inject_pose_noise(pose: &Pose, sigma_t: f64, sigma_r: f64, seed: u64) -> (Pose, f64) {
    assert!(sigma_t >= 0.0 && sigma_r >= 0.0);
    let mut rng = seeded_rng(seed);
    let delta = if sigma_t > 0.0 {
        let n = Normal::new(0.0, sigma_t).expect("valid sigma");
        Vec3::new(n.sample(&mut rng), n.sample(&mut rng), n.sample(&mut rng))
    } else {
        Vec3::zeros()
    };
    let rotation = if sigma_r > 0.0 {
        let n = Normal::new(0.0, sigma_r).expect("valid sigma");
        let rv = Vec3::new(n.sample(&mut rng), n.sample(&mut rng), n.sample(&mut rng));
        Rotation3::from_scaled_axis(rv) * pose.rotation
    } else {
        pose.rotation
    };
    (
        Pose::new(pose.position + delta, rotation),
        delta.norm(),
    )
}

/// Estimated object poses: ground truth plus injected noise, with poses
/// whose error norm exceeds `threshold` discarded. Returns (noisy pose,
/// scene object index) pairs; the index mapping is what downstream target
/// identification uses.
pub fn estimate_poses(
    scene: &BinScene,
    sigma_t: f64,
    sigma_r: f64,
    threshold: f64,
    seed: u64,
) -> Vec<(Pose, usize)> {
    let mut out = Vec::new();
    for (j, (_, pose)) in scene.objects.iter().enumerate() {
        let (noisy, err) = inject_pose_noise(pose, sigma_t, sigma_r, derive_seed(seed, j as u64));
        if err <= threshold {
            out.push((noisy, j));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn test_object() -> ObjectModel {
        ObjectModel::boxed(0.025, 0.045, 0.03).unwrap()
    }

    #[test]
    fn single_object_rests_on_floor() {
        let scene = gen_scene(&test_object(), 1, &Bin::default(), 0.01, 3).unwrap();
        assert_eq!(scene.objects.len(), 1);
        let (obj, pose) = &scene.objects[0];
        let (lo, _) = world_aabb(obj, pose);
        assert_relative_eq!(lo.z, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn nine_objects_reproducible_and_clear() {
        let scene = gen_scene(&test_object(), 9, &Bin::default(), 0.01, 7).unwrap();
        assert_eq!(scene.objects.len(), 9);
        scene.validate().unwrap();
        let again = gen_scene(&test_object(), 9, &Bin::default(), 0.01, 7).unwrap();
        assert_eq!(scene, again);
        // independent interpenetration oracle: surface samples of each object
        // must not be strictly inside any other
        for i in 0..9 {
            for j in 0..9 {
                if i == j {
                    continue;
                }
                let (a, pa) = &scene.objects[i];
                let (b, pb) = &scene.objects[j];
                for p in a.surface_points_local(0.006) {
                    let w = pa.transform_point(&p);
                    assert!(
                        b.sdf_world(&w, pb) > -1e-6,
                        "objects {i}/{j} overlap at {w:?}"
                    );
                }
            }
        }
        // adjacency: each object within the gap of some other
        for i in 0..9 {
            let (a, pa) = &scene.objects[i];
            let min = (0..9)
                .filter(|&j| j != i)
                .map(|j| {
                    let (b, pb) = &scene.objects[j];
                    pair_distance((a, pa), (b, pb))
                })
                .fold(f64::INFINITY, f64::min);
            assert!(min <= 0.01 + 1e-9, "object {i} is isolated ({min})");
        }
    }

    #[test]
    fn capacity_error_when_bin_too_small() {
        let bin = Bin {
            size_x: 0.06,
            size_y: 0.06,
            wall_height: 0.05,
        };
        let err = gen_scene(&test_object(), 40, &bin, 0.002, 1);
        assert!(matches!(err, Err(Error::Capacity(_))));
    }

    #[test]
    fn capture_sphere_zero_noise_lands_on_surface() {
        let sphere = ObjectModel::sphere(0.03).unwrap();
        let scene = BinScene {
            bin: Bin::default(),
            objects: vec![(
                sphere,
                Pose::new(Point3::new(0.0, 0.0, 0.03), Rotation3::identity()),
            )],
            seed: 0,
        };
        // field of view narrow enough (including the diagonal) that every
        // ray hits the sphere
        let sensor = SensorConfig {
            noise_sigma: 0.0,
            fov: 0.08,
            ..SensorConfig::default()
        };
        let cloud = capture(&scene, &sensor, 5);
        assert!(cloud.len() > 100);
        for p in &cloud.points {
            let sd = sphere.sdf_world(p, &scene.objects[0].1);
            assert!(sd.abs() < 1e-9, "point off surface by {sd}");
        }
    }

    #[test]
    fn occluded_object_contributes_no_points() {
        // big box hides a sphere placed under the camera axis behind it
        let blocker = ObjectModel::boxed(0.12, 0.12, 0.04).unwrap();
        let hidden = ObjectModel::sphere(0.02).unwrap();
        let hidden_pose = Pose::new(Point3::new(0.0, 0.0, 0.02), Rotation3::identity());
        let scene = BinScene {
            bin: Bin::default(),
            objects: vec![
                (
                    blocker,
                    Pose::new(Point3::new(0.0, 0.0, 0.1), Rotation3::identity()),
                ),
                (hidden, hidden_pose),
            ],
            seed: 0,
        };
        let sensor = SensorConfig {
            noise_sigma: 0.0,
            ..SensorConfig::default()
        };
        let cloud = capture(&scene, &sensor, 5);
        for p in &cloud.points {
            assert!(hidden.sdf_world(p, &hidden_pose) > 1e-6);
        }
    }

    #[test]
    fn capture_zero_noise_all_points_on_geometry() {
        let scene = gen_scene(&test_object(), 4, &Bin::default(), 0.01, 21).unwrap();
        let sensor = SensorConfig {
            noise_sigma: 0.0,
            ..SensorConfig::default()
        };
        let cloud = capture(&scene, &sensor, 2);
        assert!(cloud.len() > 1000);
        let mut geoms = scene.objects.clone();
        geoms.extend(scene.bin.solids());
        for p in &cloud.points {
            let min = geoms
                .iter()
                .map(|(o, pose)| o.sdf_world(p, pose).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(min < 1e-9, "point {p:?} off geometry by {min}");
        }
        // determinism
        let again = capture(&scene, &sensor, 2);
        assert_eq!(cloud, again);
    }

    #[test]
    fn segment_two_far_clusters() {
        let mut pts = Vec::new();
        for i in 0..20 {
            pts.push(Point3::new(0.001 * i as f64, 0.0, 0.0));
            pts.push(Point3::new(1.0 + 0.001 * i as f64, 0.0, 0.0));
        }
        let cloud = PointCloud::new("world", pts);
        let segs = segment(&cloud, 0.1);
        assert_eq!(segs.len(), 2);
        let segs = segment(&cloud, 2.0);
        assert_eq!(segs.len(), 1);
    }

    #[test]
    fn segment_matches_brute_force_union_find() {
        let mut rng = seeded_rng(37);
        let pts: Vec<Point3> = (0..400)
            .map(|_| {
                Point3::new(
                    rng.random_range(0.0..0.1),
                    rng.random_range(0.0..0.1),
                    rng.random_range(0.0..0.02),
                )
            })
            .collect();
        let cloud = PointCloud::new("world", pts.clone());
        let dist = 0.008;
        let segs = segment(&cloud, dist);
        // O(n^2) brute-force oracle
        let n = pts.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for i in 0..n {
            for j in 0..i {
                if (pts[i] - pts[j]).norm() <= dist {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        let mut expected: HashMap<usize, Vec<usize>> = HashMap::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            expected.entry(r).or_default().push(i);
        }
        let mut expected: Vec<Vec<usize>> = expected.into_values().collect();
        expected.sort_by_key(|v| v[0]);
        let got: Vec<Vec<usize>> = segs.iter().map(|s| s.indices.clone()).collect();
        assert_eq!(got, expected);
        // partition: disjoint and exhaustive
        let total: usize = segs.iter().map(|s| s.indices.len()).sum();
        assert_eq!(total, n);
        let mut seen = vec![false; n];
        for s in &segs {
            for &i in &s.indices {
                assert!(!seen[i]);
                seen[i] = true;
            }
        }
    }

    #[test]
    fn bbox_filter_cases() {
        let obj = test_object(); // extents 0.025 x 0.045 x 0.03
        let seg = |ex: f64, ey: f64, ez: f64| Segment {
            indices: vec![0],
            bbox_min: Point3::origin(),
            bbox_max: Point3::new(ex, ey, ez),
        };
        let exact = seg(0.025, 0.045, 0.03);
        assert_eq!(bbox_filter(&[exact.clone()], &obj, 0.05).len(), 1);
        // rotated segment (extents permuted) still kept
        let rotated = seg(0.045, 0.025, 0.03);
        assert_eq!(bbox_filter(&[rotated], &obj, 0.05).len(), 1);
        let double = seg(0.05, 0.09, 0.06);
        assert_eq!(bbox_filter(&[double], &obj, 0.2).len(), 0);
        let occluded = seg(0.025 * 0.85, 0.045 * 0.85, 0.03 * 0.85);
        assert_eq!(bbox_filter(&[occluded], &obj, 0.2).len(), 1);
    }

    #[test]
    fn pose_noise_zero_sigmas_is_identity() {
        let pose = Pose::new(
            Point3::new(0.1, 0.2, 0.3),
            Rotation3::from_euler_angles(0.1, 0.2, 0.3),
        );
        let (noisy, err) = inject_pose_noise(&pose, 0.0, 0.0, 9);
        assert_eq!(noisy, pose);
        assert_eq!(err, 0.0);
        assert_eq!(DEFAULT_POSE_ERROR_THRESHOLD, 0.007);
    }

    #[test]
    fn pose_noise_error_norm_matches_maxwell_mean() {
        let pose = Pose::identity();
        let sigma = 0.003;
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|i| inject_pose_noise(&pose, sigma, 0.0, i as u64).1)
            .sum::<f64>()
            / n as f64;
        let analytic = 2.0 * sigma * (2.0 / std::f64::consts::PI).sqrt();
        assert!(
            (mean - analytic).abs() / analytic < 0.05,
            "mean {mean} vs analytic {analytic}"
        );
    }

    #[test]
    fn scene_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scene.json");
        let scene = gen_scene(&test_object(), 3, &Bin::default(), 0.01, 11).unwrap();
        scene.save(&path).unwrap();
        let back = BinScene::load(&path).unwrap();
        assert_eq!(back.bin, scene.bin);
        assert_eq!(back.seed, scene.seed);
        assert_eq!(back.objects.len(), scene.objects.len());
        for ((a, pa), (b, pb)) in scene.objects.iter().zip(back.objects.iter()) {
            assert_eq!(a, b);
            assert!((pa.position - pb.position).norm() < 1e-12);
            assert!((pa.rotation.matrix() - pb.rotation.matrix()).amax() < 1e-9);
        }
    }
}
