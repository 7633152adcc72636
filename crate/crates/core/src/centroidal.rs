//! The centroidal QP: pick the horizontal CoM projection and the contact
//! wrenches of both feet and the hand, closest to a desired distribution,
//! subject to Newton–Euler balance, contact cones and the hand force target.
//!
//! Decision vector layout (21 entries): `com` 0–2, right foot 3–8, left foot
//! 9–14, right hand 15–20. Contact wrenches are in their contact frames and
//! mapped to the world inside the balance rows.

use alloc::format;
use alloc::string::String;
use nalgebra::{DMatrix, DVector};

use crate::constraints::{
    build_constraint_blocks, contact_rows, ConstraintBlocks, ContactBlock, FrictionBounds, SlidingSpec,
    CONTACT_OFFSETS, DECISION_LEN,
};
use crate::csa::{build_csa, build_csa_with_torque, contains, ContactMode, ContactPatch, CsaMiddle, Point2, SupportPolygon};
use crate::qp::{solve_qp, QpProblem, QpSolution, QpStatus};
use crate::spatial::{gravity_com_map, gravity_offset, to_world, wrench_map, Frame, Vec3, Vec6, Wrench};
use crate::{Error, G_MAG};

pub const NE_TOL: f64 = 1e-6;
pub const SLIDE_TOL: f64 = 1e-8;
pub const CONE_TOL: f64 = 1e-8;

/// Contact order in the decision vector.
pub const RF: usize = 0;
pub const LF: usize = 1;
pub const RH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionVector {
    pub com: Vec3,
    pub w_rf: Wrench,
    pub w_lf: Wrench,
    pub w_rh: Wrench,
}

impl DecisionVector {
    pub fn wrenches(&self) -> [Wrench; 3] {
        [self.w_rf, self.w_lf, self.w_rh]
    }

    pub fn to_vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(DECISION_LEN);
        v.fixed_rows_mut::<3>(0).copy_from(&self.com);
        for (w, &off) in self.wrenches().iter().zip(CONTACT_OFFSETS.iter()) {
            v.fixed_rows_mut::<6>(off).copy_from(&w.to_vector());
        }
        v
    }

    pub fn from_vector(v: &DVector<f64>) -> Result<Self, Error> {
        if v.len() != DECISION_LEN {
            return Err(Error::DimensionMismatch("decision vector must have 21 entries"));
        }
        let w = |i: usize| {
            let off = CONTACT_OFFSETS[i];
            Wrench::from_vector(&Vec6::from_iterator(v.rows(off, 6).iter().copied()), Frame::Contact(i))
        };
        Ok(Self { com: Vec3::new(v[0], v[1], v[2]), w_rf: w(RF), w_lf: w(LF), w_rh: w(RH) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ComPolicy {
    #[default]
    Free,
    /// CoM projection pinned to the given point.
    Fixed(Point2),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidalSetup {
    pub mass: f64,
    pub g_mag: f64,
    /// Right foot, left foot.
    pub feet: [ContactPatch; 2],
    pub hand: ContactPatch,
    /// Hand force target: required for a sliding hand, a hard pin for a fixed
    /// one; `None` leaves a fixed hand free inside its cone.
    pub hand_target: Option<SlidingSpec>,
    /// Bounds for rf, lf, rh.
    pub bounds: [FrictionBounds; 3],
    pub y_des: Option<DecisionVector>,
    pub com_policy: ComPolicy,
    pub middle: CsaMiddle,
    /// Optional diagonal cost weights; `None` means P = 2I.
    pub weights: Option<DVector<f64>>,
}

impl CentroidalSetup {
    /// Setup with default gravity, free CoM, centroid middle and unit weights.
    pub fn new(
        mass: f64,
        feet: [ContactPatch; 2],
        hand: ContactPatch,
        hand_target: Option<SlidingSpec>,
        bounds: [FrictionBounds; 3],
    ) -> Result<Self, Error> {
        let s = Self {
            mass,
            g_mag: G_MAG,
            feet,
            hand,
            hand_target,
            bounds,
            y_des: None,
            com_policy: ComPolicy::Free,
            middle: CsaMiddle::Centroid,
            weights: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn weight(&self) -> f64 {
        self.mass * self.g_mag
    }

    pub fn contacts(&self) -> [ContactPatch; 3] {
        [self.feet[0], self.feet[1], self.hand]
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.mass > 0.0) || !(self.g_mag > 0.0) {
            return Err(Error::InvalidInput("mass and gravity must be positive".into()));
        }
        if self.feet.iter().any(|f| f.mode != ContactMode::Fixed) {
            return Err(Error::InvalidInput("feet must be fixed contacts".into()));
        }
        match (&self.hand_target, self.hand.mode) {
            (None, ContactMode::Sliding) => {
                return Err(Error::InvalidInput("sliding hand requires a sliding target".into()))
            }
            (Some(t), mode) => t.validate(self.hand.mu, mode)?,
            _ => {}
        }
        if let Some(w) = &self.weights {
            if w.len() != DECISION_LEN || w.iter().any(|&x| !(x > 0.0)) {
                return Err(Error::InvalidInput("weights must be 21 positive entries".into()));
            }
        }
        Ok(())
    }

    fn blocks(&self) -> Result<ConstraintBlocks, Error> {
        let c = self.contacts();
        let blocks: [ContactBlock; 3] =
            core::array::from_fn(|i| ContactBlock { patch: c[i], bounds: self.bounds[i], column: CONTACT_OFFSETS[i] });
        build_constraint_blocks(&blocks, self.hand_target.as_ref())
    }

    /// Desired hand wrench in the hand contact frame.
    pub fn hand_target_wrench(&self) -> Wrench {
        let force = self.hand_target.map_or(Vec3::zeros(), |t| t.contact_force(self.hand.normal_axis));
        Wrench::new(force, Vec3::zeros(), Frame::Contact(RH))
    }

    /// CSA for the desired hand wrench (target force, zero torque).
    pub fn desired_csa(&self) -> Result<SupportPolygon, Error> {
        let f = self.hand.pose.rotation * self.hand_target_wrench().force;
        build_csa(&self.feet, &self.hand.pose.position, &f, self.weight())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentroidalResult {
    pub y: DecisionVector,
    pub world_wrenches: [Wrench; 3],
    /// CSA built from the solved hand wrench.
    pub csa: SupportPolygon,
    pub status: QpStatus,
    pub newton_euler_residual: f64,
    /// ‖M w_rh − k‖∞ (zero when no hand target is set).
    pub sliding_residual: f64,
    /// Smallest slack of each contact's inequality rows.
    pub cone_margins: [f64; 3],
    /// Foot weights α_i = f_i^z / (S_c m g).
    pub alphas: [f64; 2],
    pub y_des: DecisionVector,
    pub qp: QpSolution,
}

/// Desired decision vector: CoM at the middle of `csa`, feet sharing the
/// remaining weight equally as pure vertical forces, hand at its target.
pub fn desired_y(setup: &CentroidalSetup, csa: &SupportPolygon) -> Result<DecisionVector, Error> {
    let mid = csa.middle(setup.middle);
    let w_rh = setup.hand_target_wrench();
    let hand_fz = (setup.hand.pose.rotation * w_rh.force).z;
    let per_foot = 0.5 * (setup.weight() - hand_fz);
    let foot = |i: usize| {
        let f = setup.feet[i].pose.rotation.transpose() * Vec3::new(0.0, 0.0, per_foot);
        Wrench::new(f, Vec3::zeros(), Frame::Contact(i))
    };
    Ok(DecisionVector { com: Vec3::new(mid.x, mid.y, 0.0), w_rf: foot(RF), w_lf: foot(LF), w_rh })
}

/// Rows of the balance equations: E^m1 com + Σ E_c w_c = −E^m2.
fn newton_euler_rows(setup: &CentroidalSetup) -> (DMatrix<f64>, Vec6) {
    let weight = setup.weight();
    let mut a = DMatrix::zeros(6, DECISION_LEN);
    a.view_mut((0, 0), (6, 3)).copy_from(&gravity_com_map(weight));
    for (patch, &off) in setup.contacts().iter().zip(CONTACT_OFFSETS.iter()) {
        a.view_mut((0, off), (6, 6)).copy_from(&wrench_map(&patch.pose));
    }
    (a, -gravity_offset(weight))
}

pub fn assemble(setup: &CentroidalSetup) -> Result<QpProblem, Error> {
    setup.validate()?;
    let y_des = match &setup.y_des {
        Some(y) => *y,
        None => desired_y(setup, &setup.desired_csa()?)?,
    };
    assemble_with(setup, &y_des)
}

fn assemble_with(setup: &CentroidalSetup, y_des: &DecisionVector) -> Result<QpProblem, Error> {
    let blocks = setup.blocks()?;
    let n = DECISION_LEN;
    let w = setup.weights.clone().unwrap_or_else(|| DVector::from_element(n, 1.0));
    let p = DMatrix::from_diagonal(&(&w * 2.0));
    let q = -(w.component_mul(&y_des.to_vector()) * 2.0);

    let pins = match setup.com_policy {
        ComPolicy::Free => 0,
        ComPolicy::Fixed(_) => 2,
    };
    let mut a = DMatrix::zeros(13 + pins, n);
    let mut b = DVector::zeros(13 + pins);
    let (ne, ne_rhs) = newton_euler_rows(setup);
    a.view_mut((0, 0), (6, n)).copy_from(&ne);
    b.rows_mut(0, 6).copy_from(&ne_rhs);
    a.view_mut((6, 0), (6, n)).copy_from(&blocks.a_slide);
    b.rows_mut(6, 6).copy_from(&blocks.k);
    a[(12, 2)] = 1.0;
    if let ComPolicy::Fixed(pt) = setup.com_policy {
        a[(13, 0)] = 1.0;
        a[(14, 1)] = 1.0;
        b[13] = pt.x;
        b[14] = pt.y;
    }
    QpProblem::new(p, q, blocks.g, blocks.h, a, b)
}

pub fn solve_centroidal(setup: &CentroidalSetup) -> Result<CentroidalResult, Error> {
    setup.validate()?;
    let y_des = match &setup.y_des {
        Some(y) => *y,
        None => desired_y(setup, &setup.desired_csa()?)?,
    };
    let problem = assemble_with(setup, &y_des)?;
    let sol = solve_qp(&problem)?;
    match sol.status {
        QpStatus::Infeasible => {
            return Err(Error::BalanceInfeasible(infeasibility_report(setup, &sol)));
        }
        QpStatus::MaxIter => {
            return Err(Error::NumericalBreakdown("centroidal QP hit the iteration cap"));
        }
        QpStatus::Optimal => {}
    }
    let y = DecisionVector::from_vector(&sol.y)?;
    let contacts = setup.contacts();
    let world_wrenches: [Wrench; 3] = core::array::from_fn(|i| to_world(&contacts[i].pose, &y.wrenches()[i]));

    let newton_euler_residual = newton_euler_residual(setup, &y);
    let blocks = setup.blocks()?;
    let sliding_residual = if setup.hand_target.is_some() {
        (&blocks.a_slide * &sol.y - DVector::from_column_slice(blocks.k.as_slice())).amax()
    } else {
        0.0
    };
    let slack = &blocks.h - &blocks.g * &sol.y;
    let cone_margins: [f64; 3] =
        core::array::from_fn(|i| contact_rows(i, 3).into_iter().map(|r| slack[r]).fold(f64::INFINITY, f64::min));

    let hand_world = &world_wrenches[RH];
    let hand_p = contacts[RH].pose.position;
    let hand_torque_at_point = hand_world.torque - hand_p.cross(&hand_world.force);
    let csa = build_csa_with_torque(&setup.feet, &hand_p, &hand_world.force, &hand_torque_at_point, setup.weight())?;
    let alphas = [
        world_wrenches[RF].force.z / (csa.scale * setup.weight()),
        world_wrenches[LF].force.z / (csa.scale * setup.weight()),
    ];

    if newton_euler_residual > NE_TOL {
        return Err(Error::NumericalBreakdown("post-check: Newton-Euler residual above tolerance"));
    }
    if sliding_residual > SLIDE_TOL {
        return Err(Error::NumericalBreakdown("post-check: sliding equality residual above tolerance"));
    }
    if cone_margins.iter().any(|&m| m < -CONE_TOL) {
        return Err(Error::NumericalBreakdown("post-check: contact wrench outside its cone"));
    }
    if !contains(&csa, &Point2::new(y.com.x, y.com.y)) {
        return Err(Error::NumericalBreakdown("post-check: CoM outside the support area"));
    }
    Ok(CentroidalResult {
        y,
        world_wrenches,
        csa,
        status: sol.status,
        newton_euler_residual,
        sliding_residual,
        cone_margins,
        alphas,
        y_des,
        qp: sol,
    })
}

/// ‖gravity + Σ contact wrenches‖∞ in the world frame.
pub fn newton_euler_residual(setup: &CentroidalSetup, y: &DecisionVector) -> f64 {
    let (a, b) = newton_euler_rows(setup);
    (a * y.to_vector() - DVector::from_column_slice(b.as_slice())).amax()
}

fn infeasibility_report(setup: &CentroidalSetup, sol: &QpSolution) -> String {
    let target = setup.hand_target.map_or(0.0, |t| t.normal_force);
    let detail = match &sol.certificate {
        Some((z, y)) => format!("certificate hᵀz + bᵀy with |z|₁ = {:.3e}, |y|₁ = {:.3e}", z.lp_norm(1), y.lp_norm(1)),
        None => String::from("no certificate"),
    };
    format!("no balanced wrench distribution for hand force {target:.3} N ({detail})")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csa::NormalAxis;
    use crate::spatial::ContactPose;

    fn setup(target: f64) -> CentroidalSetup {
        let foot = |y: f64| ContactPatch::foot(ContactPose::at(Vec3::new(0.0, y, 0.0)), 0.1, 0.05, 0.8).unwrap();
        let hand = ContactPatch::new(
            ContactPose::at(Vec3::new(0.4, -0.2, 1.0)),
            0.03,
            0.03,
            0.6,
            ContactMode::Fixed,
            NormalAxis::X,
        )
        .unwrap();
        let fb = |p: &ContactPatch| FrictionBounds::for_patch(p, 0.0, 2000.0).unwrap();
        let feet = [foot(-0.1), foot(0.1)];
        CentroidalSetup::new(50.0, feet, hand, Some(SlidingSpec::push(target)), [fb(&feet[0]), fb(&feet[1]), fb(&hand)])
            .unwrap()
    }

    #[test]
    fn symmetric_zero_push() {
        let s = setup(0.0);
        let r = solve_centroidal(&s).unwrap();
        assert!(r.y.com.xy().amax() < 1e-8);
        assert!((r.y.w_rf.force.z - s.weight() / 2.0).abs() < 1e-8);
        assert!((r.y.w_lf.force.z - s.weight() / 2.0).abs() < 1e-8);
        assert!(r.y.w_rh.force.amax() < 1e-8);
    }

    #[test]
    fn desired_values() {
        let s = setup(0.0);
        let csa = s.desired_csa().unwrap();
        let y = desired_y(&s, &csa).unwrap();
        assert!((y.w_rf.force.z - s.weight() / 2.0).abs() < 1e-12);
        assert_eq!(y.com.z, 0.0);
        // a hand pulling up by 20 N at weight 100 leaves 40 N per foot
        let mut s2 = s.clone();
        s2.mass = 100.0 / s2.g_mag;
        s2.hand.pose.rotation = nalgebra::Matrix3::new(0.0, 0.0, 1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0);
        s2.hand_target = Some(SlidingSpec::push(20.0));
        let f = s2.hand.pose.rotation * s2.hand_target_wrench().force;
        assert!((f.z - 20.0).abs() < 1e-12);
        let y = desired_y(&s2, &s2.desired_csa().unwrap()).unwrap();
        assert!((y.w_rf.force.z - 40.0).abs() < 1e-12);
    }

    #[test]
    fn layout_of_assembled_problem() {
        let s = setup(30.0);
        let qp = assemble(&s).unwrap();
        assert!(qp.p.diagonal().iter().all(|&d| d == 2.0));
        assert_eq!((qp.g.nrows(), qp.a.nrows()), (60, 13));
        for r in 6..12 {
            for c in 0..15 {
                assert_eq!(qp.a[(r, c)], 0.0);
            }
        }
    }

    #[test]
    fn push_moves_com_toward_wall() {
        let zero = solve_centroidal(&setup(0.0)).unwrap();
        let push = solve_centroidal(&setup(60.0)).unwrap();
        assert!(push.y.com.x > zero.y.com.x + 1e-3);
        assert!((push.y.w_rh.force.x + 60.0).abs() < 1e-8);
        assert!(push.newton_euler_residual < 1e-8);
        assert!((push.alphas[0] + push.alphas[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fixed_com_push_becomes_infeasible() {
        let mut s = setup(200.0);
        s.com_policy = ComPolicy::Fixed(Point2::zeros());
        assert!(matches!(solve_centroidal(&s), Err(Error::BalanceInfeasible(_))));
    }

    #[test]
    fn idempotent_resolve() {
        let s = setup(45.0);
        let r = solve_centroidal(&s).unwrap();
        let mut s2 = s.clone();
        s2.y_des = Some(r.y);
        let r2 = solve_centroidal(&s2).unwrap();
        assert!((r2.qp.y.clone() - r.qp.y.clone()).amax() < 1e-8);
    }

    #[test]
    fn sliding_needs_target() {
        let mut s = setup(10.0);
        s.hand.mode = ContactMode::Sliding;
        s.hand_target = None;
        assert!(solve_centroidal(&s).is_err());
    }
}
