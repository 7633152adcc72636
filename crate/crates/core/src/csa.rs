//! CoM support area (CSA) for two coplanar feet plus one prescribed hand
//! wrench.
//!
//! With both soles on the ground plane, vertical force balance and the moment
//! balance about the horizontal axes give
//!
//! ```text
//! p_G − A = Σ α_i (S_c p_i),   α_i = f_i^z / (S_c m g),   Σ α_i = 1
//! A   = (f_h^z p_h − p_h^z f_h + e_z × τ_h) / (m g)
//! S_c = 1 − f_h^z / (m g)
//! ```
//!
//! so the horizontal CoM must lie in the hull of the scaled sole corners,
//! shifted by `A`. Unilateral contacts add α_i ≥ 0.

use alloc::vec::Vec;
use nalgebra::Vector2;

use crate::spatial::{ContactPose, Vec3};
use crate::Error;

pub type Point2 = Vector2<f64>;

const DUPLICATE_TOL: f64 = 1e-9;
const COLLINEAR_EPS: f64 = 1e-12;
const CONTAINS_TOL: f64 = 1e-9;
const BALANCE_TOL: f64 = 1e-6;
const MIN_SCALE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactMode {
    Fixed,
    Sliding,
}

/// Contact-frame axis carrying the surface normal.
///
/// `Z` is a sole frame: +z points out of the ground into the robot. `X` and `Y`
/// are approach frames as used for a hand on a wall: +x (or +y) points from the
/// end effector into the surface, so the pressing force has a negative
/// component along that axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalAxis {
    X,
    Y,
    Z,
}

impl NormalAxis {
    /// Contact-frame unit vectors of the first tangent, second tangent and the
    /// inward normal (direction of the pressing force on the robot). The three
    /// form a right-handed frame.
    pub fn canonical_axes(self) -> [Vec3; 3] {
        match self {
            NormalAxis::Z => [Vec3::x(), Vec3::y(), Vec3::z()],
            NormalAxis::X => [Vec3::z(), Vec3::y(), -Vec3::x()],
            NormalAxis::Y => [Vec3::x(), Vec3::z(), -Vec3::y()],
        }
    }

    /// Index of the normal axis in a contact-frame 3-vector.
    pub fn index(self) -> usize {
        match self {
            NormalAxis::X => 0,
            NormalAxis::Y => 1,
            NormalAxis::Z => 2,
        }
    }
}

/// Rectangular surface contact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPatch {
    pub pose: ContactPose,
    /// Half-length along the first tangent [m].
    pub half_x: f64,
    /// Half-length along the second tangent [m].
    pub half_y: f64,
    pub mu: f64,
    pub mode: ContactMode,
    pub normal_axis: NormalAxis,
}

impl ContactPatch {
    pub fn new(
        pose: ContactPose,
        half_x: f64,
        half_y: f64,
        mu: f64,
        mode: ContactMode,
        normal_axis: NormalAxis,
    ) -> Result<Self, Error> {
        if !(half_x > 0.0 && half_y > 0.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "patch half-dimensions must be positive (got {half_x}, {half_y})"
            )));
        }
        if !(mu > 0.0 && mu < 2.0) {
            return Err(Error::InvalidInput(alloc::format!("friction coefficient {mu} outside (0, 2)")));
        }
        Ok(Self { pose, half_x, half_y, mu, mode, normal_axis })
    }

    /// Fixed sole on the ground with +z up.
    pub fn foot(pose: ContactPose, half_x: f64, half_y: f64, mu: f64) -> Result<Self, Error> {
        Self::new(pose, half_x, half_y, mu, ContactMode::Fixed, NormalAxis::Z)
    }

    /// World coordinates of the four rectangle corners.
    pub fn corners(&self) -> [Vec3; 4] {
        let [t1, t2, _] = self.normal_axis.canonical_axes();
        let mut out = [Vec3::zeros(); 4];
        for (k, (sx, sy)) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)].into_iter().enumerate() {
            out[k] = self.pose.transform_point(&(t1 * (sx * self.half_x) + t2 * (sy * self.half_y)));
        }
        out
    }
}

/// Which interior point counts as the "middle" of a support polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CsaMiddle {
    #[default]
    Centroid,
    Chebyshev,
}

/// Convex CSA polygon, vertices counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportPolygon {
    pub vertices: Vec<Point2>,
    /// Offset A [m].
    pub offset: Point2,
    /// Scale S_c.
    pub scale: f64,
}

impl SupportPolygon {
    /// Minimum over edges of the signed distance to the edge line, positive
    /// inside.
    pub fn signed_distance(&self, p: &Point2) -> f64 {
        edges(&self.vertices)
            .map(|(a, b)| {
                let e = b - a;
                cross(&e, &(p - a)) / e.norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn area(&self) -> f64 {
        0.5 * edges(&self.vertices).map(|(a, b)| cross(a, b)).sum::<f64>()
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point2 {
        let mut acc = Point2::zeros();
        let mut twice_area = 0.0;
        for (a, b) in edges(&self.vertices) {
            let c = cross(a, b);
            twice_area += c;
            acc += (a + b) * c;
        }
        acc / (3.0 * twice_area)
    }

    /// Center of the largest inscribed circle.
    ///
    /// The optimum touches three edge lines (two of them possibly parallel), so
    /// every triple is tried and the feasible point with the largest radius
    /// wins. Polygons here have at most a few dozen edges.
    pub fn chebyshev_center(&self) -> Point2 {
        let lines: Vec<(Point2, f64)> = edges(&self.vertices)
            .map(|(a, b)| {
                let e = (b - a).normalize();
                // inward unit normal n, n·x ≥ n·a inside
                let n = Point2::new(-e.y, e.x);
                (n, n.dot(a))
            })
            .collect();
        let mut best = (f64::NEG_INFINITY, self.centroid());
        let k = lines.len();
        for i in 0..k {
            for j in (i + 1)..k {
                for l in (j + 1)..k {
                    // n·x − r = c for the three lines
                    let m = nalgebra::Matrix3::new(
                        lines[i].0.x, lines[i].0.y, -1.0,
                        lines[j].0.x, lines[j].0.y, -1.0,
                        lines[l].0.x, lines[l].0.y, -1.0,
                    );
                    let rhs = Vec3::new(lines[i].1, lines[j].1, lines[l].1);
                    let Some(sol) = m.lu().solve(&rhs) else { continue };
                    let (x, r) = (Point2::new(sol.x, sol.y), sol.z);
                    if !r.is_finite() || r <= best.0 + 1e-15 {
                        continue;
                    }
                    if lines.iter().all(|(n, c)| n.dot(&x) - c >= r - 1e-12) {
                        best = (r, x);
                    }
                }
            }
        }
        best.1
    }

    pub fn middle(&self, kind: CsaMiddle) -> Point2 {
        match kind {
            CsaMiddle::Centroid => self.centroid(),
            CsaMiddle::Chebyshev => self.chebyshev_center(),
        }
    }
}

fn cross(a: &Point2, b: &Point2) -> f64 {
    a.x * b.y - a.y * b.x
}

fn edges(v: &[Point2]) -> impl Iterator<Item = (&Point2, &Point2)> {
    v.iter().zip(v.iter().cycle().skip(1))
}

/// Horizontal CoM position implied by point contacts `(position, force)` in
/// static equilibrium: `(Σ f_i^z p_i − p_i^z f_i) / (m g)`.
pub fn com_projection(contacts: &[(Vec3, Vec3)], weight: f64) -> Result<Point2, Error> {
    let total_fz: f64 = contacts.iter().map(|(_, f)| f.z).sum();
    if (total_fz - weight).abs() > BALANCE_TOL {
        return Err(Error::VerticalBalanceViolation { total_fz, weight });
    }
    let sum = contacts.iter().fold(Vec3::zeros(), |acc, (p, f)| acc + p * f.z - f * p.z);
    Ok(Point2::new(sum.x, sum.y) / weight)
}

/// Offset A for a point hand contact: `(f^z p − p^z f) / (m g)`.
pub fn sliding_offset(hand_position: &Vec3, hand_force: &Vec3, weight: f64) -> Point2 {
    sliding_offset_with_torque(hand_position, hand_force, &Vec3::zeros(), weight)
}

/// Offset A including a hand torque `tau` resolved at the hand point; the
/// torque enters as `e_z × τ`.
pub fn sliding_offset_with_torque(p: &Vec3, f: &Vec3, tau: &Vec3, weight: f64) -> Point2 {
    let a = p * f.z - f * p.z;
    Point2::new(a.x - tau.y, a.y + tau.x) / weight
}

/// S_c = 1 − f_h^z / (m g).
pub fn scale_factor(hand_force_z: f64, weight: f64) -> Result<f64, Error> {
    let s = 1.0 - hand_force_z / weight;
    if s <= MIN_SCALE {
        return Err(Error::DegenerateScale(s));
    }
    Ok(s)
}

/// CSA for fixed feet on the ground plane and a point hand force.
pub fn build_csa(
    feet: &[ContactPatch],
    hand_position: &Vec3,
    hand_force: &Vec3,
    weight: f64,
) -> Result<SupportPolygon, Error> {
    build_csa_with_torque(feet, hand_position, hand_force, &Vec3::zeros(), weight)
}

/// CSA for a hand wrench with torque `hand_torque` about the hand point.
pub fn build_csa_with_torque(
    feet: &[ContactPatch],
    hand_position: &Vec3,
    hand_force: &Vec3,
    hand_torque: &Vec3,
    weight: f64,
) -> Result<SupportPolygon, Error> {
    if feet.is_empty() {
        return Err(Error::InvalidInput("at least one foot is required".into()));
    }
    let scale = scale_factor(hand_force.z, weight)?;
    let offset = sliding_offset_with_torque(hand_position, hand_force, hand_torque, weight);
    let mut points = Vec::with_capacity(4 * feet.len());
    for (index, foot) in feet.iter().enumerate() {
        for c in foot.corners() {
            if c.z.abs() > 1e-9 {
                return Err(Error::NonCoplanarFeet { index, z: c.z });
            }
            points.push(Point2::new(c.x, c.y) * scale + offset);
        }
    }
    let vertices = convex_hull(&points)?;
    Ok(SupportPolygon { vertices, offset, scale })
}

/// Inside or on the boundary (signed distance ≥ −1e-9 to every edge).
pub fn contains(polygon: &SupportPolygon, point: &Point2) -> bool {
    polygon.signed_distance(point) >= -CONTAINS_TOL
}

/// Monotone-chain convex hull, counter-clockwise, collinear points removed.
pub fn convex_hull(points: &[Point2]) -> Result<Vec<Point2>, Error> {
    let mut pts: Vec<Point2> = Vec::with_capacity(points.len());
    for p in points {
        if !pts.iter().any(|q| (q - p).amax() <= DUPLICATE_TOL) {
            pts.push(*p);
        }
    }
    if pts.len() < 3 {
        return Err(Error::DegenerateHull);
    }
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));

    let turn = |o: &Point2, a: &Point2, b: &Point2| cross(&(a - o), &(b - o));
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for p in pts.iter() {
        while hull.len() >= 2 && turn(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= COLLINEAR_EPS {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower_len = hull.len() + 1;
    for p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= COLLINEAR_EPS {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    if hull.len() < 3 {
        return Err(Error::DegenerateHull);
    }
    Ok(hull)
}
