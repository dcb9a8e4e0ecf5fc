//! Primitive object models (box, cylinder, sphere) with exact signed
//! distances, ray casts, deterministic surface sampling, and the 2-D
//! footprint machinery used for settling and clearance queries on upright
//! objects.
//!
//! Object local frames are centered at the centroid; the cylinder axis is
//! the local z axis. All lengths are meters.

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point3, Pose, Vec3};

/// Primitive shape, dimensions in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    /// Full extents along the local axes.
    Box { size: [f64; 3] },
    /// Axis along local z, `height` is the full height.
    Cylinder { radius: f64, height: f64 },
    Sphere { radius: f64 },
}

/// A rigid object: a primitive shape plus its exact canonical bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectModel {
    pub shape: Shape,
}

impl ObjectModel {
    pub fn new(shape: Shape) -> Result<Self> {
        let ok = match shape {
            Shape::Box { size } => size.iter().all(|&s| s > 0.0 && s.is_finite()),
            Shape::Cylinder { radius, height } => {
                radius > 0.0 && height > 0.0 && radius.is_finite() && height.is_finite()
            }
            Shape::Sphere { radius } => radius > 0.0 && radius.is_finite(),
        };
        if !ok {
            return Err(Error::Config("object dimensions must be positive".into()));
        }
        Ok(ObjectModel { shape })
    }

    pub fn boxed(sx: f64, sy: f64, sz: f64) -> Result<Self> {
        Self::new(Shape::Box { size: [sx, sy, sz] })
    }

    pub fn cylinder(radius: f64, height: f64) -> Result<Self> {
        Self::new(Shape::Cylinder { radius, height })
    }

    pub fn sphere(radius: f64) -> Result<Self> {
        Self::new(Shape::Sphere { radius })
    }

    /// Stable human-readable identifier derived from the dimensions.
    pub fn name(&self) -> String {
        match self.shape {
            Shape::Box { size } => format!("box_{}x{}x{}", size[0], size[1], size[2]),
            Shape::Cylinder { radius, height } => format!("cylinder_r{radius}_h{height}"),
            Shape::Sphere { radius } => format!("sphere_r{radius}"),
        }
    }

    /// Canonical (local-frame) bounding box extents; encloses the shape exactly.
    pub fn bbox_extents(&self) -> Vec3 {
        match self.shape {
            Shape::Box { size } => Vec3::new(size[0], size[1], size[2]),
            Shape::Cylinder { radius, height } => Vec3::new(2.0 * radius, 2.0 * radius, height),
            Shape::Sphere { radius } => Vec3::new(2.0 * radius, 2.0 * radius, 2.0 * radius),
        }
    }

    /// Half the vertical extent when the object stands upright.
    pub fn half_height(&self) -> f64 {
        self.bbox_extents().z * 0.5
    }

    /// Radius of the bounding circle of the upright footprint.
    pub fn horizontal_radius(&self) -> f64 {
        match self.shape {
            Shape::Box { size } => 0.5 * (size[0] * size[0] + size[1] * size[1]).sqrt(),
            Shape::Cylinder { radius, .. } | Shape::Sphere { radius } => radius,
        }
    }

    /// Exact signed distance in the local frame: negative inside.
    pub fn sdf_local(&self, p: &Point3) -> f64 {
        match self.shape {
            Shape::Box { size } => {
                let h = Vec3::new(size[0] * 0.5, size[1] * 0.5, size[2] * 0.5);
                let q = Vec3::new(p.x.abs() - h.x, p.y.abs() - h.y, p.z.abs() - h.z);
                let outside = Vec3::new(q.x.max(0.0), q.y.max(0.0), q.z.max(0.0)).norm();
                let inside = q.x.max(q.y).max(q.z).min(0.0);
                outside + inside
            }
            Shape::Cylinder { radius, height } => {
                let dr = (p.x * p.x + p.y * p.y).sqrt() - radius;
                let dz = p.z.abs() - height * 0.5;
                let outside = (dr.max(0.0).powi(2) + dz.max(0.0).powi(2)).sqrt();
                let inside = dr.max(dz).min(0.0);
                outside + inside
            }
            Shape::Sphere { radius } => p.coords.norm() - radius,
        }
    }

    pub fn sdf_world(&self, p: &Point3, pose: &Pose) -> f64 {
        self.sdf_local(&pose.inv_transform_point(p))
    }

    /// Euclidean distance from a point to the solid object: zero inside.
    pub fn distance_to_solid(&self, p: &Point3, pose: &Pose) -> f64 {
        self.sdf_world(p, pose).max(0.0)
    }

    /// Outward surface normal at (or near) `p`, in world coordinates.
    /// Central differences of the signed distance; adequate everywhere a
    /// sensed point can land.
    pub fn normal_world(&self, p: &Point3, pose: &Pose) -> Vec3 {
        let lp = pose.inv_transform_point(p);
        let e = 1e-6;
        let g = Vec3::new(
            self.sdf_local(&Point3::new(lp.x + e, lp.y, lp.z))
                - self.sdf_local(&Point3::new(lp.x - e, lp.y, lp.z)),
            self.sdf_local(&Point3::new(lp.x, lp.y + e, lp.z))
                - self.sdf_local(&Point3::new(lp.x, lp.y - e, lp.z)),
            self.sdf_local(&Point3::new(lp.x, lp.y, lp.z + e))
                - self.sdf_local(&Point3::new(lp.x, lp.y, lp.z - e)),
        );
        let n = if g.norm() > 0.0 { g.normalize() } else { Vec3::z() };
        pose.rotation * n
    }

    /// First intersection of the ray `origin + t * dir` (unit `dir`) with the
    /// shape boundary, `t > 1e-12`.
    pub fn ray_cast_world(&self, origin: &Point3, dir: &Vec3, pose: &Pose) -> Option<f64> {
        let o = pose.inv_transform_point(origin);
        let d = pose.inv_transform_vector(dir);
        self.ray_cast_local(&o, &d)
    }

    fn ray_cast_local(&self, o: &Point3, d: &Vec3) -> Option<f64> {
        const T_MIN: f64 = 1e-12;
        match self.shape {
            Shape::Box { size } => {
                let h = [size[0] * 0.5, size[1] * 0.5, size[2] * 0.5];
                let mut t_near = f64::NEG_INFINITY;
                let mut t_far = f64::INFINITY;
                for a in 0..3 {
                    let (oa, da, ha) = (o[a], d[a], h[a]);
                    if da.abs() < 1e-15 {
                        if oa.abs() > ha {
                            return None;
                        }
                    } else {
                        let mut t0 = (-ha - oa) / da;
                        let mut t1 = (ha - oa) / da;
                        if t0 > t1 {
                            std::mem::swap(&mut t0, &mut t1);
                        }
                        t_near = t_near.max(t0);
                        t_far = t_far.min(t1);
                        if t_near > t_far {
                            return None;
                        }
                    }
                }
                first_valid(&[t_near, t_far], T_MIN)
            }
            Shape::Cylinder { radius, height } => {
                let hh = height * 0.5;
                let mut hits: Vec<f64> = Vec::new();
                // lateral surface
                let a = d.x * d.x + d.y * d.y;
                if a > 1e-15 {
                    let b = 2.0 * (o.x * d.x + o.y * d.y);
                    let c = o.x * o.x + o.y * o.y - radius * radius;
                    let disc = b * b - 4.0 * a * c;
                    if disc >= 0.0 {
                        let s = disc.sqrt();
                        for t in [(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)] {
                            if (o.z + t * d.z).abs() <= hh {
                                hits.push(t);
                            }
                        }
                    }
                }
                // caps
                if d.z.abs() > 1e-15 {
                    for zc in [-hh, hh] {
                        let t = (zc - o.z) / d.z;
                        let x = o.x + t * d.x;
                        let y = o.y + t * d.y;
                        if x * x + y * y <= radius * radius {
                            hits.push(t);
                        }
                    }
                }
                first_valid(&hits, T_MIN)
            }
            Shape::Sphere { radius } => {
                let oc = o.coords;
                let b = 2.0 * oc.dot(d);
                let c = oc.norm_squared() - radius * radius;
                let disc = b * b - 4.0 * c;
                if disc < 0.0 {
                    return None;
                }
                let s = disc.sqrt();
                first_valid(&[(-b - s) / 2.0, (-b + s) / 2.0], T_MIN)
            }
        }
    }

    /// Deterministic surface sample points in the local frame, roughly
    /// `spacing` meters apart. Used by the pick oracle's contact search and
    /// by test oracles; never by the sensing path.
    pub fn surface_points_local(&self, spacing: f64) -> Vec<Point3> {
        assert!(spacing > 0.0);
        let mut pts = Vec::new();
        match self.shape {
            Shape::Box { size } => {
                let h = [size[0] * 0.5, size[1] * 0.5, size[2] * 0.5];
                // six faces, one grid each
                for (fixed, sign) in [(0usize, -1.0), (0, 1.0), (1, -1.0), (1, 1.0), (2, -1.0), (2, 1.0)] {
                    let (u, v) = match fixed {
                        0 => (1, 2),
                        1 => (0, 2),
                        _ => (0, 1),
                    };
                    for a in linspace(-h[u], h[u], steps(size[u], spacing)) {
                        for b in linspace(-h[v], h[v], steps(size[v], spacing)) {
                            let mut c = [0.0; 3];
                            c[fixed] = sign * h[fixed];
                            c[u] = a;
                            c[v] = b;
                            pts.push(Point3::new(c[0], c[1], c[2]));
                        }
                    }
                }
            }
            Shape::Cylinder { radius, height } => {
                let hh = height * 0.5;
                let n_theta = ((2.0 * std::f64::consts::PI * radius / spacing).ceil() as usize).max(8);
                for z in linspace(-hh, hh, steps(height, spacing)) {
                    for k in 0..n_theta {
                        let th = 2.0 * std::f64::consts::PI * k as f64 / n_theta as f64;
                        pts.push(Point3::new(radius * th.cos(), radius * th.sin(), z));
                    }
                }
                for zc in [-hh, hh] {
                    pts.push(Point3::new(0.0, 0.0, zc));
                    let n_rings = ((radius / spacing).ceil() as usize).max(1);
                    for ri in 1..=n_rings {
                        let r = radius * ri as f64 / n_rings as f64;
                        let n = ((2.0 * std::f64::consts::PI * r / spacing).ceil() as usize).max(6);
                        for k in 0..n {
                            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                            pts.push(Point3::new(r * th.cos(), r * th.sin(), zc));
                        }
                    }
                }
            }
            Shape::Sphere { radius } => {
                let n_lat = ((std::f64::consts::PI * radius / spacing).ceil() as usize).max(4);
                pts.push(Point3::new(0.0, 0.0, radius));
                pts.push(Point3::new(0.0, 0.0, -radius));
                for i in 1..n_lat {
                    let phi = std::f64::consts::PI * i as f64 / n_lat as f64;
                    let r = radius * phi.sin();
                    let z = radius * phi.cos();
                    let n_lon = ((2.0 * std::f64::consts::PI * r / spacing).ceil() as usize).max(6);
                    for k in 0..n_lon {
                        let th = 2.0 * std::f64::consts::PI * k as f64 / n_lon as f64;
                        pts.push(Point3::new(r * th.cos(), r * th.sin(), z));
                    }
                }
            }
        }
        pts
    }
}

fn steps(extent: f64, spacing: f64) -> usize {
    ((extent / spacing).ceil() as usize).max(1) + 1
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn first_valid(ts: &[f64], t_min: f64) -> Option<f64> {
    ts.iter()
        .copied()
        .filter(|t| *t > t_min)
        .fold(None, |acc: Option<f64>, t| match acc {
            Some(best) if best <= t => Some(best),
            _ => Some(t),
        })
}

// ---------------------------------------------------------------------------
// Upright-pose helpers: supports, vertical intervals, 2-D footprints.
// ---------------------------------------------------------------------------

/// Extent of the object along a world direction, measured from its position:
/// `max over shape of dir . (p_world - position)`.
pub fn support_extent(obj: &ObjectModel, pose: &Pose, dir: &Vec3) -> f64 {
    let d = pose.inv_transform_vector(dir); // direction in local frame, unit
    match obj.shape {
        Shape::Box { size } => {
            0.5 * (size[0] * d.x.abs() + size[1] * d.y.abs() + size[2] * d.z.abs())
        }
        Shape::Cylinder { radius, height } => {
            let dp = (d.x * d.x + d.y * d.y).sqrt();
            radius * dp + 0.5 * height * d.z.abs()
        }
        Shape::Sphere { radius } => radius,
    }
}

/// World axis-aligned bounding box, valid for any pose.
pub fn world_aabb(obj: &ObjectModel, pose: &Pose) -> (Point3, Point3) {
    let c = pose.position;
    let ex = support_extent(obj, pose, &Vec3::x());
    let ey = support_extent(obj, pose, &Vec3::y());
    let ez = support_extent(obj, pose, &Vec3::z());
    (
        Point3::new(c.x - ex, c.y - ey, c.z - ez),
        Point3::new(c.x + ex, c.y + ey, c.z + ez),
    )
}

/// True if the pose keeps the object's local z axis aligned with world z.
pub fn is_upright(pose: &Pose) -> bool {
    (pose.rotation * Vec3::z() - Vec3::z()).norm() < 1e-9
}

/// `[z_min, z_max]` of an upright object.
pub fn vertical_interval(obj: &ObjectModel, pose: &Pose) -> (f64, f64) {
    let hh = obj.half_height();
    (pose.position.z - hh, pose.position.z + hh)
}

/// 2-D cross-section of an upright object, in the world xy plane.
#[derive(Debug, Clone)]
pub enum Footprint {
    Disk { center: Point2<f64>, radius: f64 },
    /// Convex polygon, counter-clockwise.
    Poly(Vec<Point2<f64>>),
}

/// Footprint of an upright object. For a sphere this is the equatorial disk;
/// sphere pairs are handled by dedicated closed forms in [`pair_distance`].
pub fn upright_footprint(obj: &ObjectModel, pose: &Pose) -> Footprint {
    debug_assert!(is_upright(pose));
    let c = Point2::new(pose.position.x, pose.position.y);
    match obj.shape {
        Shape::Box { size } => {
            let r = pose.rotation.matrix();
            let (cx, sx) = (r[(0, 0)], r[(1, 0)]); // world image of local x axis
            let hx = size[0] * 0.5;
            let hy = size[1] * 0.5;
            let ux = Point2::new(cx * hx, sx * hx);
            let uy = Point2::new(-sx * hy, cx * hy);
            Footprint::Poly(vec![
                Point2::new(c.x + ux.x + uy.x, c.y + ux.y + uy.y),
                Point2::new(c.x - ux.x + uy.x, c.y - ux.y + uy.y),
                Point2::new(c.x - ux.x - uy.x, c.y - ux.y - uy.y),
                Point2::new(c.x + ux.x - uy.x, c.y + ux.y - uy.y),
            ])
        }
        Shape::Cylinder { radius, .. } | Shape::Sphere { radius } => {
            Footprint::Disk { center: c, radius }
        }
    }
}

fn seg_seg_distance(a0: Point2<f64>, a1: Point2<f64>, b0: Point2<f64>, b1: Point2<f64>) -> f64 {
    fn point_seg(p: Point2<f64>, s0: Point2<f64>, s1: Point2<f64>) -> f64 {
        let d = s1 - s0;
        let len2 = d.norm_squared();
        let t = if len2 > 0.0 {
            ((p - s0).dot(&d) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (p - (s0 + d * t)).norm()
    }
    // proper crossing test
    let d1 = cross2(a1 - a0, b0 - a0);
    let d2 = cross2(a1 - a0, b1 - a0);
    let d3 = cross2(b1 - b0, a0 - b0);
    let d4 = cross2(b1 - b0, a1 - b0);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return 0.0;
    }
    point_seg(b0, a0, a1)
        .min(point_seg(b1, a0, a1))
        .min(point_seg(a0, b0, b1))
        .min(point_seg(a1, b0, b1))
}

fn cross2(a: nalgebra::Vector2<f64>, b: nalgebra::Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Signed distance from a point to a convex CCW polygon: negative inside.
pub fn point_poly_distance(p: Point2<f64>, poly: &[Point2<f64>]) -> f64 {
    let n = poly.len();
    let mut inside = true;
    let mut min_edge = f64::INFINITY;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if cross2(b - a, p - a) < 0.0 {
            inside = false;
        }
        let d = seg_seg_distance(p, p, a, b);
        min_edge = min_edge.min(d);
    }
    if inside {
        -min_edge
    } else {
        min_edge
    }
}

fn polys_overlap_sat(a: &[Point2<f64>], b: &[Point2<f64>]) -> f64 {
    // Max separation over all edge normals. Negative => overlapping,
    // and the value is then a (conservative) penetration indicator.
    let mut max_sep = f64::NEG_INFINITY;
    for (poly, other) in [(a, b), (b, a)] {
        let n = poly.len();
        for i in 0..n {
            let e = poly[(i + 1) % n] - poly[i];
            let axis = nalgebra::Vector2::new(e.y, -e.x); // outward for CCW
            let len = axis.norm();
            if len < 1e-15 {
                continue;
            }
            let axis = axis / len;
            let amax = poly
                .iter()
                .map(|p| axis.dot(&p.coords))
                .fold(f64::NEG_INFINITY, f64::max);
            let bmin = other
                .iter()
                .map(|p| axis.dot(&p.coords))
                .fold(f64::INFINITY, f64::min);
            max_sep = max_sep.max(bmin - amax);
        }
    }
    max_sep
}

/// Distance between two footprints: exact nonnegative distance when
/// separated, negative when overlapping.
pub fn footprint_distance(a: &Footprint, b: &Footprint) -> f64 {
    match (a, b) {
        (Footprint::Disk { center: ca, radius: ra }, Footprint::Disk { center: cb, radius: rb }) => {
            (ca - cb).norm() - ra - rb
        }
        (Footprint::Disk { center, radius }, Footprint::Poly(p))
        | (Footprint::Poly(p), Footprint::Disk { center, radius }) => {
            point_poly_distance(*center, p) - radius
        }
        (Footprint::Poly(pa), Footprint::Poly(pb)) => {
            let sep = polys_overlap_sat(pa, pb);
            if sep < 0.0 {
                return sep;
            }
            let mut best = f64::INFINITY;
            for i in 0..pa.len() {
                for j in 0..pb.len() {
                    best = best.min(seg_seg_distance(
                        pa[i],
                        pa[(i + 1) % pa.len()],
                        pb[j],
                        pb[(j + 1) % pb.len()],
                    ));
                }
            }
            best
        }
    }
}

fn point_footprint_distance(p: Point2<f64>, f: &Footprint) -> f64 {
    match f {
        Footprint::Disk { center, radius } => (p - center).norm() - radius,
        Footprint::Poly(poly) => point_poly_distance(p, poly),
    }
}

/// Distance from a world point to an upright prism (box or cylinder):
/// negative inside.
fn point_to_prism(p: &Point3, obj: &ObjectModel, pose: &Pose) -> f64 {
    let fp = upright_footprint(obj, pose);
    let hd = point_footprint_distance(Point2::new(p.x, p.y), &fp);
    let (z0, z1) = vertical_interval(obj, pose);
    let dz = (z0 - p.z).max(p.z - z1);
    if hd <= 0.0 && dz <= 0.0 {
        hd.max(dz)
    } else {
        (hd.max(0.0).powi(2) + dz.max(0.0).powi(2)).sqrt()
    }
}

/// Signed distance between two upright objects: exact nonnegative distance
/// when separated, negative when interpenetrating. Spheres are handled by
/// closed forms; boxes and cylinders as z-axis prisms.
pub fn pair_distance(a: (&ObjectModel, &Pose), b: (&ObjectModel, &Pose)) -> f64 {
    let sphere_r = |o: &ObjectModel| match o.shape {
        Shape::Sphere { radius } => Some(radius),
        _ => None,
    };
    match (sphere_r(a.0), sphere_r(b.0)) {
        (Some(ra), Some(rb)) => (a.1.position - b.1.position).norm() - ra - rb,
        (Some(ra), None) => point_to_prism(&a.1.position, b.0, b.1) - ra,
        (None, Some(rb)) => point_to_prism(&b.1.position, a.0, a.1) - rb,
        (None, None) => {
            let d2 = footprint_distance(&upright_footprint(a.0, a.1), &upright_footprint(b.0, b.1));
            let (az0, az1) = vertical_interval(a.0, a.1);
            let (bz0, bz1) = vertical_interval(b.0, b.1);
            let dz = (az0 - bz1).max(bz0 - az1);
            if d2 <= 0.0 && dz <= 0.0 {
                d2.max(dz)
            } else {
                (d2.max(0.0).powi(2) + dz.max(0.0).powi(2)).sqrt()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Pose;
    use approx::assert_relative_eq;
    use nalgebra::Rotation3;

    fn upright(x: f64, y: f64, z: f64, yaw: f64) -> Pose {
        Pose::new(
            Point3::new(x, y, z),
            Rotation3::from_axis_angle(&Vec3::z_axis(), yaw),
        )
    }

    #[test]
    fn sdf_signs_and_values() {
        let b = ObjectModel::boxed(0.2, 0.4, 0.6).unwrap();
        assert_relative_eq!(b.sdf_local(&Point3::new(0.0, 0.0, 0.0)), -0.1);
        assert_relative_eq!(b.sdf_local(&Point3::new(0.3, 0.0, 0.0)), 0.2);
        let s = ObjectModel::sphere(0.5).unwrap();
        assert_relative_eq!(s.sdf_local(&Point3::new(0.0, 0.0, 1.0)), 0.5);
        let c = ObjectModel::cylinder(0.1, 0.4).unwrap();
        assert_relative_eq!(c.sdf_local(&Point3::new(0.0, 0.0, 0.3)), 0.1);
        assert_relative_eq!(c.sdf_local(&Point3::new(0.25, 0.0, 0.0)), 0.15);
    }

    #[test]
    fn ray_hits_land_on_surface() {
        let shapes = [
            ObjectModel::boxed(0.1, 0.2, 0.3).unwrap(),
            ObjectModel::cylinder(0.08, 0.25).unwrap(),
            ObjectModel::sphere(0.12).unwrap(),
        ];
        let pose = upright(0.05, -0.02, 0.1, 0.7);
        let mut rng = crate::rng::seeded_rng(11);
        use rand::Rng;
        for obj in &shapes {
            let mut hits = 0;
            for _ in 0..500 {
                let origin = Point3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    1.0,
                );
                let target = Point3::new(
                    pose.position.x + rng.random_range(-0.05..0.05),
                    pose.position.y + rng.random_range(-0.05..0.05),
                    pose.position.z,
                );
                let dir = (target - origin).normalize();
                if let Some(t) = obj.ray_cast_world(&origin, &dir, &pose) {
                    let p = origin + dir * t;
                    assert!(obj.sdf_world(&p, &pose).abs() < 1e-9);
                    hits += 1;
                }
            }
            assert!(hits > 50, "too few hits to be meaningful");
        }
    }

    #[test]
    fn surface_samples_lie_on_boundary() {
        for obj in [
            ObjectModel::boxed(0.1, 0.2, 0.3).unwrap(),
            ObjectModel::cylinder(0.08, 0.25).unwrap(),
            ObjectModel::sphere(0.12).unwrap(),
        ] {
            for p in obj.surface_points_local(0.03) {
                assert!(obj.sdf_local(&p).abs() < 1e-9, "{p:?} off surface");
            }
        }
    }

    #[test]
    fn pair_distance_matches_hand_cases() {
        let a = ObjectModel::boxed(0.1, 0.1, 0.1).unwrap();
        let s = ObjectModel::sphere(0.05).unwrap();
        // side-by-side boxes with a 0.02 gap
        let d = pair_distance(
            (&a, &upright(0.0, 0.0, 0.05, 0.0)),
            (&a, &upright(0.12, 0.0, 0.05, 0.0)),
        );
        assert_relative_eq!(d, 0.02, epsilon = 1e-12);
        // stacked boxes touching
        let d = pair_distance(
            (&a, &upright(0.0, 0.0, 0.05, 0.3)),
            (&a, &upright(0.0, 0.0, 0.15, 0.9)),
        );
        assert!(d.abs() < 1e-12);
        // sphere above box
        let d = pair_distance(
            (&s, &upright(0.0, 0.0, 0.2, 0.0)),
            (&a, &upright(0.0, 0.0, 0.05, 0.0)),
        );
        assert_relative_eq!(d, 0.05, epsilon = 1e-12);
        // overlap is negative
        let d = pair_distance(
            (&a, &upright(0.0, 0.0, 0.05, 0.0)),
            (&a, &upright(0.05, 0.0, 0.05, 0.0)),
        );
        assert!(d < 0.0);
    }

    #[test]
    fn pair_distance_agrees_with_sampled_sdf() {
        // Independent route: min over surface samples of the other object's
        // exact SDF. Upper-bounds the true distance; agreement within the
        // sampling resolution.
        let objs = [
            ObjectModel::boxed(0.06, 0.1, 0.08).unwrap(),
            ObjectModel::cylinder(0.04, 0.09).unwrap(),
            ObjectModel::sphere(0.05).unwrap(),
        ];
        let mut rng = crate::rng::seeded_rng(5);
        use rand::Rng;
        for _ in 0..60 {
            let a = &objs[rng.random_range(0..3)];
            let b = &objs[rng.random_range(0..3)];
            let pa = upright(0.0, 0.0, a.half_height(), rng.random_range(0.0..6.28));
            let pb = upright(
                rng.random_range(-0.25..0.25),
                rng.random_range(-0.25..0.25),
                b.half_height() + rng.random_range(0.0..0.1),
                rng.random_range(0.0..6.28),
            );
            let d = pair_distance((a, &pa), (b, &pb));
            let sampled = a
                .surface_points_local(0.004)
                .iter()
                .map(|p| b.sdf_world(&pa.transform_point(p), &pb))
                .fold(f64::INFINITY, f64::min);
            if d >= 0.0 {
                assert!(sampled >= d - 1e-9, "sampled {sampled} < exact {d}");
                assert!(sampled - d < 0.006, "sampled {sampled} too far from {d}");
            } else {
                assert!(sampled < 0.004, "claimed overlap but sampled {sampled}");
            }
        }
    }

    #[test]
    fn world_aabb_encloses_samples() {
        let obj = ObjectModel::boxed(0.05, 0.09, 0.03).unwrap();
        let pose = Pose::new(
            Point3::new(0.1, -0.2, 0.3),
            Rotation3::from_euler_angles(0.3, -0.5, 1.1),
        );
        let (lo, hi) = world_aabb(&obj, &pose);
        for p in obj.surface_points_local(0.01) {
            let w = pose.transform_point(&p);
            assert!(w.x >= lo.x - 1e-12 && w.x <= hi.x + 1e-12);
            assert!(w.y >= lo.y - 1e-12 && w.y <= hi.y + 1e-12);
            assert!(w.z >= lo.z - 1e-12 && w.z <= hi.z + 1e-12);
        }
    }
}
