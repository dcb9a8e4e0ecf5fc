//! Frames, point clouds, the gripper model, and the finger-motion swept
//! volume with its per-point distances.
//!
//! The swept volume models the region the fingers pass through during the
//! approach and grasp phases as a single box in a local frame: the z axis is
//! the approach axis with z = 0 at the deepest fingertip plane, the y axis
//! is the finger closing axis, and x is perpendicular to both. For a point
//! inside the volume, `d` is the distance to the y boundary and `h` the
//! height above the bottom plane.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix3, Quaternion, Rotation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shape::ObjectModel;

pub type Vec3 = nalgebra::Vector3<f64>;
pub type Point3 = nalgebra::Point3<f64>;

/// Margin added around the swept volume to tolerate sensor noise.
pub const DEFAULT_SWEPT_MARGIN: f64 = 0.002;
/// Default distance threshold for dropping swept points that belong to the
/// target object itself.
pub const DEFAULT_TARGET_REMOVAL_THRESHOLD: f64 = 0.005;
/// Tolerance on rotation orthonormality and determinant checks.
pub const ROTATION_TOL: f64 = 1e-9;

/// Rigid pose: the position and orientation of a frame expressed in its
/// parent (usually world) frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoseRepr", into = "PoseRepr")]
pub struct Pose {
    pub position: Point3,
    pub rotation: Rotation3<f64>,
}

/// Serialized form: position plus a unit quaternion in (w, x, y, z) order.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct PoseRepr {
    position: [f64; 3],
    quaternion: [f64; 4],
}

impl From<Pose> for PoseRepr {
    fn from(p: Pose) -> Self {
        PoseRepr {
            position: [p.position.x, p.position.y, p.position.z],
            quaternion: p.quaternion_wxyz(),
        }
    }
}

impl TryFrom<PoseRepr> for Pose {
    type Error = Error;
    fn try_from(r: PoseRepr) -> Result<Self> {
        let p = Point3::new(r.position[0], r.position[1], r.position[2]);
        Pose::from_quaternion_wxyz(p, r.quaternion)
    }
}

impl Pose {
    pub fn identity() -> Self {
        Pose {
            position: Point3::origin(),
            rotation: Rotation3::identity(),
        }
    }

    pub fn new(position: Point3, rotation: Rotation3<f64>) -> Self {
        Pose { position, rotation }
    }

    /// Build from a raw 3x3 matrix, checking orthonormality and det +1.
    pub fn from_matrix(position: Point3, m: &Matrix3<f64>) -> Result<Self> {
        let gram = m.transpose() * m - Matrix3::identity();
        if gram.amax() > ROTATION_TOL {
            return Err(Error::InvalidFrame("orientation is not orthonormal".into()));
        }
        if (m.determinant() - 1.0).abs() > ROTATION_TOL {
            return Err(Error::InvalidFrame("orientation determinant is not +1".into()));
        }
        Ok(Pose {
            position,
            rotation: Rotation3::from_matrix_unchecked(*m),
        })
    }

    pub fn from_quaternion_wxyz(position: Point3, q: [f64; 4]) -> Result<Self> {
        let quat = Quaternion::new(q[0], q[1], q[2], q[3]);
        if !quat.norm().is_finite() || quat.norm() < 1e-12 {
            return Err(Error::InvalidFrame("quaternion is zero or non-finite".into()));
        }
        let uq = UnitQuaternion::new_normalize(quat);
        Ok(Pose {
            position,
            rotation: uq.to_rotation_matrix(),
        })
    }

    /// Unit quaternion (w, x, y, z), sign-canonicalized so w >= 0.
    pub fn quaternion_wxyz(&self) -> [f64; 4] {
        let q = UnitQuaternion::from_rotation_matrix(&self.rotation);
        let (w, i, j, k) = (q.w, q.i, q.j, q.k);
        if w < 0.0 {
            [-w, -i, -j, -k]
        } else {
            [w, i, j, k]
        }
    }

    pub fn transform_point(&self, p: &Point3) -> Point3 {
        self.position + self.rotation * p.coords
    }

    pub fn transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation * v
    }

    pub fn inv_transform_point(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation.inverse() * (p - self.position))
    }

    pub fn inv_transform_vector(&self, v: &Vec3) -> Vec3 {
        self.rotation.inverse() * v
    }

    /// `self` followed by `local`: the pose of `local` (given in `self`'s
    /// frame) expressed in `self`'s parent frame.
    pub fn compose(&self, local: &Pose) -> Pose {
        Pose {
            position: self.position + self.rotation * local.position.coords,
            rotation: self.rotation * local.rotation,
        }
    }
}

/// Ordered set of 3-D points in a named frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub frame_id: String,
    pub points: Vec<Point3>,
}

impl PointCloud {
    pub fn new(frame_id: impl Into<String>, points: Vec<Point3>) -> Self {
        PointCloud {
            frame_id: frame_id.into(),
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// ASCII format: `# frame: <name>` header, then one `x y z` triple per
    /// line, meters. Lines starting with `#` are comments.
    pub fn write_ascii(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "# frame: {}", self.frame_id);
        for p in &self.points {
            let _ = writeln!(out, "{} {} {}", p.x, p.y, p.z);
        }
        std::fs::write(path.as_ref(), out).map_err(|e| Error::io(path.as_ref(), e))
    }

    pub fn read_ascii(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut frame_id = String::from("world");
        let mut points = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(f) = rest.trim().strip_prefix("frame:") {
                    frame_id = f.trim().to_string();
                }
                continue;
            }
            let mut it = line.split_whitespace();
            let mut coord = [0.0f64; 3];
            for c in &mut coord {
                *c = it
                    .next()
                    .ok_or_else(|| Error::parse(path, format!("line {}: expected x y z", ln + 1)))?
                    .parse()
                    .map_err(|_| Error::parse(path, format!("line {}: bad number", ln + 1)))?;
                if !c.is_finite() {
                    return Err(Error::parse(path, format!("line {}: non-finite coordinate", ln + 1)));
                }
            }
            points.push(Point3::new(coord[0], coord[1], coord[2]));
        }
        Ok(PointCloud { frame_id, points })
    }
}

/// Two-fingered parallel gripper dimensions. The wrist frame convention is
/// approach along local -z and finger closing along local y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripperModel {
    pub finger_length: f64,
    /// Finger thickness along the closing axis.
    pub finger_thickness: f64,
    /// Finger width along the x axis.
    pub finger_width: f64,
    /// Half distance between finger inner faces at the preshape.
    pub preshape_half_opening: f64,
    /// Travel from the approach pose to the grasp pose.
    pub approach_stroke: f64,
}

impl Default for GripperModel {
    fn default() -> Self {
        GripperModel {
            finger_length: 0.04,
            finger_thickness: 0.01,
            finger_width: 0.02,
            preshape_half_opening: 0.03,
            approach_stroke: 0.05,
        }
    }
}

impl GripperModel {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.finger_length,
            self.finger_thickness,
            self.finger_width,
            self.preshape_half_opening,
            self.approach_stroke,
        ];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::Config("gripper dimensions must be positive".into()))
        }
    }

    /// Approach direction in the wrist frame.
    pub fn approach_axis() -> Vec3 {
        Vec3::new(0.0, 0.0, -1.0)
    }

    /// Finger closing direction in the wrist frame.
    pub fn closing_axis() -> Vec3 {
        Vec3::new(0.0, 1.0, 0.0)
    }
}

/// Box region swept by the fingers during the approach and grasp phases,
/// in a local frame. The interior is |x| <= half_extent_x,
/// |y| <= half_extent_y, 0 <= z <= extent_z; membership tests expand every
/// face by `margin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweptVolume {
    /// Pose of the local frame in world coordinates.
    pub frame: Pose,
    pub half_extent_x: f64,
    pub half_extent_y: f64,
    pub extent_z: f64,
    pub margin: f64,
}

impl SweptVolume {
    pub fn to_local(&self, p: &Point3) -> Point3 {
        self.frame.inv_transform_point(p)
    }

    pub fn contains_local(&self, p: &Point3) -> bool {
        let m = self.margin;
        p.x.abs() <= self.half_extent_x + m
            && p.y.abs() <= self.half_extent_y + m
            && p.z >= -m
            && p.z <= self.extent_z + m
    }

    /// Oriented box of the volume expanded by `margin` on every face
    /// (pass 0.0 for the core volume).
    pub fn obb(&self, margin: f64) -> Obb {
        Obb {
            center: self
                .frame
                .transform_point(&Point3::new(0.0, 0.0, self.extent_z * 0.5)),
            rotation: self.frame.rotation,
            half_extents: Vec3::new(
                self.half_extent_x + margin,
                self.half_extent_y + margin,
                self.extent_z * 0.5 + margin,
            ),
        }
    }
}

/// A cloud point inside the swept volume with its local coordinates and the
/// two boundary distances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweptPoint {
    pub local: Point3,
    /// Distance to the swept-volume boundary along the closing (y) axis.
    /// Negative only for points in the margin shell.
    pub d: f64,
    /// Height above the bottom (deepest fingertip) plane.
    pub h: f64,
    pub source_index: usize,
}

/// Swept volume for a wrist at its grasp pose. `approach_dir` and
/// `closing_dir` are unit vectors in the wrist frame; they must be
/// orthogonal. The volume covers both finger corridors and the closing
/// sweep, which collapse to a single box when the fingers fully close.
pub fn build_swept_volume(
    wrist: &Pose,
    approach_dir: Vec3,
    closing_dir: Vec3,
    gripper: &GripperModel,
    margin: f64,
) -> Result<SweptVolume> {
    gripper.validate()?;
    if margin < 0.0 {
        return Err(Error::Config("margin must be nonnegative".into()));
    }
    if (approach_dir.norm() - 1.0).abs() > 1e-9 || (closing_dir.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidFrame("approach/closing axes must be unit length".into()));
    }
    if approach_dir.dot(&closing_dir).abs() > 1e-6 {
        return Err(Error::InvalidFrame(
            "approach and closing axes must be orthogonal".into(),
        ));
    }
    let approach_w = wrist.rotation * approach_dir;
    let closing_w = wrist.rotation * closing_dir;
    // Local frame: z opposes the travel direction so z = 0 is the deepest
    // fingertip plane; re-orthonormalize to absorb the 1e-6 axis slack.
    let z = (-approach_w).normalize();
    let y = (closing_w - closing_w.dot(&z) * z).normalize();
    let x = y.cross(&z);
    let rotation = Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]));
    let origin = wrist.position + approach_w * gripper.finger_length;
    Ok(SweptVolume {
        frame: Pose::new(origin, rotation),
        half_extent_x: gripper.finger_width * 0.5,
        half_extent_y: gripper.preshape_half_opening + gripper.finger_thickness,
        extent_z: gripper.approach_stroke + gripper.finger_length,
        margin,
    })
}

/// Points of `cloud` inside the margin-expanded swept volume, with their
/// local coordinates and d/h distances. `cloud` must be expressed in the
/// same world frame the volume was built in.
pub fn classify_points(cloud: &PointCloud, sv: &SweptVolume) -> Vec<SweptPoint> {
    let mut out = Vec::new();
    for (i, p) in cloud.points.iter().enumerate() {
        let local = sv.to_local(p);
        if sv.contains_local(&local) {
            out.push(SweptPoint {
                local,
                d: sv.half_extent_y - local.y.abs(),
                h: local.z,
                source_index: i,
            });
        }
    }
    out
}

/// Drops every swept point whose distance to the target object's surface is
/// within `threshold`; survivor order is preserved. Idempotent.
pub fn remove_target_points(
    swept: &[SweptPoint],
    cloud: &PointCloud,
    target: &ObjectModel,
    target_pose: &Pose,
    threshold: f64,
) -> Vec<SweptPoint> {
    assert!(threshold >= 0.0, "threshold must be nonnegative");
    swept
        .iter()
        .filter(|sp| target.distance_to_solid(&cloud.points[sp.source_index], target_pose) > threshold)
        .copied()
        .collect()
}

/// Clamps d and h to be nonnegative, the form consumed by feature
/// extraction. Points in the margin shell otherwise carry small negative
/// distances.
pub fn clamp_nonnegative(swept: &[SweptPoint]) -> Vec<SweptPoint> {
    swept
        .iter()
        .map(|sp| SweptPoint {
            d: sp.d.max(0.0),
            h: sp.h.max(0.0),
            ..*sp
        })
        .collect()
}

/// Oriented bounding box used for corridor/wall and corridor/object tests.
#[derive(Debug, Clone, Copy)]
pub struct Obb {
    pub center: Point3,
    pub rotation: Rotation3<f64>,
    pub half_extents: Vec3,
}

impl Obb {
    pub fn from_aabb(min: Point3, max: Point3) -> Self {
        Obb {
            center: nalgebra::center(&min, &max),
            rotation: Rotation3::identity(),
            half_extents: (max - min) * 0.5,
        }
    }

    /// Separating-axis test over the 15 candidate axes.
    pub fn intersects(&self, other: &Obb) -> bool {
        let ra = self.rotation.matrix();
        let rb = other.rotation.matrix();
        // rotation of b expressed in a's frame
        let r = ra.transpose() * rb;
        let t_world = other.center - self.center;
        let t = ra.transpose() * t_world;
        let abs_r = r.map(|v| v.abs() + 1e-12);
        let (ea, eb) = (self.half_extents, other.half_extents);

        // a's axes
        for i in 0..3 {
            let rb_ext = eb.x * abs_r[(i, 0)] + eb.y * abs_r[(i, 1)] + eb.z * abs_r[(i, 2)];
            if t[i].abs() > ea[i] + rb_ext {
                return false;
            }
        }
        // b's axes
        for j in 0..3 {
            let ra_ext = ea.x * abs_r[(0, j)] + ea.y * abs_r[(1, j)] + ea.z * abs_r[(2, j)];
            let dist = (t.x * r[(0, j)] + t.y * r[(1, j)] + t.z * r[(2, j)]).abs();
            if dist > ra_ext + eb[j] {
                return false;
            }
        }
        // cross products a_i x b_j
        for i in 0..3 {
            for j in 0..3 {
                let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
                let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
                let ra_ext = ea[i1] * abs_r[(i2, j)] + ea[i2] * abs_r[(i1, j)];
                let rb_ext = eb[j1] * abs_r[(i, j2)] + eb[j2] * abs_r[(i, j1)];
                let dist = (t[i2] * r[(i1, j)] - t[i1] * r[(i2, j)]).abs();
                if dist > ra_ext + rb_ext {
                    return false;
                }
            }
        }
        true
    }

    /// Distance from a point to the box, zero inside.
    pub fn distance_to_point(&self, p: &Point3) -> f64 {
        let local = self.rotation.inverse() * (p - self.center);
        let q = Vec3::new(
            (local.x.abs() - self.half_extents.x).max(0.0),
            (local.y.abs() - self.half_extents.y).max(0.0),
            (local.z.abs() - self.half_extents.z).max(0.0),
        );
        q.norm()
    }
}
