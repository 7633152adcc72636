//! 3D/6D arithmetic: skew maps, wrenches, contact-to-world wrench transforms
//! and the gravity wrench.
//!
//! Wrenches are stored force first, torque second. World-frame torques are
//! resolved about the world origin; contact-frame torques about the contact
//! point.

use nalgebra::{Matrix3, Matrix6, Matrix6x3, Vector3, Vector6};

use crate::{Error, G_MAG};

pub type Vec3 = Vector3<f64>;
pub type Vec6 = Vector6<f64>;

/// Frame a wrench is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    World,
    /// Frame of the contact with the given index in the decision layout.
    Contact(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wrench {
    pub force: Vec3,
    pub torque: Vec3,
    pub frame: Frame,
}

impl Wrench {
    pub fn new(force: Vec3, torque: Vec3, frame: Frame) -> Self {
        Self { force, torque, frame }
    }

    pub fn zero(frame: Frame) -> Self {
        Self::new(Vec3::zeros(), Vec3::zeros(), frame)
    }

    pub fn from_vector(v: &Vec6, frame: Frame) -> Self {
        Self::new(v.fixed_rows::<3>(0).into(), v.fixed_rows::<3>(3).into(), frame)
    }

    pub fn to_vector(&self) -> Vec6 {
        let mut v = Vec6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.force);
        v.fixed_rows_mut::<3>(3).copy_from(&self.torque);
        v
    }

    pub fn is_finite(&self) -> bool {
        self.force.iter().chain(self.torque.iter()).all(|x| x.is_finite())
    }
}

/// Placement of a contact frame in the world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPose {
    pub position: Vec3,
    /// Maps contact-frame vectors to world vectors.
    pub rotation: Matrix3<f64>,
}

impl ContactPose {
    /// Checks orthonormality (RᵀR = I to 1e-12) and det = +1.
    pub fn new(position: Vec3, rotation: Matrix3<f64>) -> Result<Self, Error> {
        if !position.iter().chain(rotation.iter()).all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("pose has non-finite entries".into()));
        }
        let orth = (rotation.transpose() * rotation - Matrix3::identity()).amax();
        if orth > 1e-12 || (rotation.determinant() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(alloc::format!(
                "rotation is not a proper orthonormal matrix (|RᵀR − I| = {orth:e})"
            )));
        }
        Ok(Self { position, rotation })
    }

    pub fn at(position: Vec3) -> Self {
        Self { position, rotation: Matrix3::identity() }
    }

    /// Contact frame rotated by `yaw` about the world z axis.
    pub fn from_yaw(position: Vec3, yaw: f64) -> Self {
        Self::from_rpy(position, 0.0, 0.0, yaw)
    }

    /// R = Rz(yaw)·Ry(pitch)·Rx(roll).
    pub fn from_rpy(position: Vec3, roll: f64, pitch: f64, yaw: f64) -> Self {
        let (sr, cr) = (libm::sin(roll), libm::cos(roll));
        let (sp, cp) = (libm::sin(pitch), libm::cos(pitch));
        let (sy, cy) = (libm::sin(yaw), libm::cos(yaw));
        #[rustfmt::skip]
        let rotation = Matrix3::new(
            cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr,
            sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr,
            -sp,     cp * sr,                cp * cr,
        );
        Self { position, rotation }
    }

    /// World coordinates of a point given in the contact frame.
    pub fn transform_point(&self, local: &Vec3) -> Vec3 {
        self.position + self.rotation * local
    }
}

/// Cross-product matrix: `skew(p) * v == p × v`.
pub fn skew(p: &Vec3) -> Matrix3<f64> {
    #[rustfmt::skip]
    let m = Matrix3::new(
        0.0,  -p.z,  p.y,
        p.z,   0.0, -p.x,
        -p.y,  p.x,  0.0,
    );
    m
}

/// 6×6 map taking a contact-frame wrench (torque about the contact point) to
/// the world-frame wrench resolved at the origin:
///
/// ```text
/// E = | R          0 |
///     | [p]× R     R |
/// ```
pub fn wrench_map(pose: &ContactPose) -> Matrix6<f64> {
    let r = pose.rotation;
    let mut e = Matrix6::zeros();
    e.fixed_view_mut::<3, 3>(0, 0).copy_from(&r);
    e.fixed_view_mut::<3, 3>(3, 0).copy_from(&(skew(&pose.position) * r));
    e.fixed_view_mut::<3, 3>(3, 3).copy_from(&r);
    e
}

/// Maps a contact-frame wrench to the world frame.
pub fn to_world(pose: &ContactPose, w: &Wrench) -> Wrench {
    let force = pose.rotation * w.force;
    let torque = pose.position.cross(&force) + pose.rotation * w.torque;
    Wrench::new(force, torque, Frame::World)
}

/// Gravity wrench on a body of `mass` kg with CoM at `com`, using [`G_MAG`].
pub fn gravity_wrench(com: &Vec3, mass: f64) -> Wrench {
    gravity_wrench_weight(com, mass * G_MAG)
}

/// Gravity wrench for a body of the given weight m·g [N].
pub fn gravity_wrench_weight(com: &Vec3, weight: f64) -> Wrench {
    let force = Vec3::new(0.0, 0.0, -weight);
    Wrench::new(force, com.cross(&force), Frame::World)
}

/// E^m1: the linear part of the gravity wrench in the horizontal CoM
/// projection. The third column (CoM height) is structurally zero.
pub fn gravity_com_map(weight: f64) -> Matrix6x3<f64> {
    let mut m = Matrix6x3::zeros();
    m[(3, 1)] = -weight;
    m[(4, 0)] = weight;
    m
}

/// E^m2: the constant part of the gravity wrench.
pub fn gravity_offset(weight: f64) -> Vec6 {
    Vec6::new(0.0, 0.0, -weight, 0.0, 0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3 {
        Vec3::new(
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
            rng.gen_range(-scale..scale),
        )
    }

    fn random_pose(rng: &mut ChaCha8Rng) -> ContactPose {
        ContactPose::from_rpy(
            random_vec(rng, 2.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-1.5..1.5),
            rng.gen_range(-3.0..3.0),
        )
    }

    #[test]
    fn skew_basics() {
        assert_eq!(skew(&Vec3::zeros()), Matrix3::zeros());
        let v = skew(&Vec3::z()) * Vec3::x();
        assert_eq!(v, Vec3::y());
    }

    #[test]
    fn skew_matches_cross_and_is_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let p = random_vec(&mut rng, 5.0);
            let v = random_vec(&mut rng, 5.0);
            let s = skew(&p);
            // componentwise definition of the cross product
            let cross = Vec3::new(p.y * v.z - p.z * v.y, p.z * v.x - p.x * v.z, p.x * v.y - p.y * v.x);
            assert!((s * v - cross).amax() < 1e-12);
            assert_eq!(s.transpose(), -s);
        }
    }

    #[test]
    fn wrench_map_origin_is_identity() {
        let e = wrench_map(&ContactPose::at(Vec3::zeros()));
        assert_eq!(e, Matrix6::identity());
    }

    #[test]
    fn wrench_map_offset_contact() {
        let e = wrench_map(&ContactPose::at(Vec3::new(1.0, 0.0, 0.0)));
        let w = Vec6::new(0.0, 0.0, 1.0, 0.0, 0.0, 0.0);
        assert_eq!(e * w, Vec6::new(0.0, 0.0, 1.0, 0.0, -1.0, 0.0));
    }

    #[test]
    fn wrench_map_matches_definition_on_random_poses() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let pose = random_pose(&mut rng);
            let f = random_vec(&mut rng, 100.0);
            let tau = random_vec(&mut rng, 10.0);
            let rf = pose.rotation * f;
            let expect_torque = pose.position.cross(&rf) + pose.rotation * tau;
            let got = wrench_map(&pose) * Wrench::new(f, tau, Frame::Contact(0)).to_vector();
            let expect = Wrench::new(rf, expect_torque, Frame::World).to_vector();
            assert!((got - expect).amax() <= 1e-12, "diff {}", (got - expect).amax());
            assert!((to_world(&pose, &Wrench::new(f, tau, Frame::Contact(0))).to_vector() - expect).amax() <= 1e-12);
        }
    }

    #[test]
    fn wrench_map_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let e = wrench_map(&random_pose(&mut rng));
            let w1 = Vec6::from_fn(|_, _| rng.gen_range(-50.0..50.0));
            let w2 = Vec6::from_fn(|_, _| rng.gen_range(-50.0..50.0));
            let (a, b) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let lhs = e * (w1 * a + w2 * b);
            let rhs = e * w1 * a + e * w2 * b;
            assert!((lhs - rhs).amax() <= 1e-12 * lhs.amax().max(1.0));
        }
    }

    #[test]
    fn gravity_wrench_examples() {
        let w = gravity_wrench(&Vec3::zeros(), 1.0);
        assert_eq!(w.force, Vec3::new(0.0, 0.0, -9.81));
        assert_eq!(w.torque, Vec3::zeros());
        let w = gravity_wrench(&Vec3::x(), 1.0);
        assert!((w.torque - Vec3::new(0.0, 9.81, 0.0)).amax() < 1e-15);
    }

    #[test]
    fn gravity_wrench_matches_linear_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let mass = rng.gen_range(1.0..100.0);
            let com = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0);
            let weight = mass * G_MAG;
            let direct = gravity_wrench(&com, mass).to_vector();
            let linear = gravity_com_map(weight) * com + gravity_offset(weight);
            assert!((direct - linear).amax() < 1e-10);
            // vertical force does not depend on the CoM
            assert_eq!(direct[2], -weight);
        }
    }

    #[test]
    fn pose_validation() {
        let bad = Matrix3::new(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0);
        assert!(ContactPose::new(Vec3::zeros(), bad).is_err());
        let p = ContactPose::from_rpy(Vec3::zeros(), 0.3, -0.2, 1.0);
        assert!(ContactPose::new(p.position, p.rotation).is_ok());
    }
}
