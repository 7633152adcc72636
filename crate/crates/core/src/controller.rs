//! Reduced closed-loop layer around the centroidal QP: the task laws of the
//! whole-body controller and a quasi-static scenario integrator.
//!
//! The CoM is a double integrator driven by the CoM task toward the QP's CoM.
//! The hand presses on a linear-stiffness surface through an admittance loop
//! on the pressing axis; the measured force lags the surface force with a
//! first-order filter. Foot loads follow a lever model at the actual CoM plus
//! a vertical compliance term driven by the foot force difference controller.

use alloc::vec::Vec;
use nalgebra::Vector2;

use crate::centroidal::{solve_centroidal, CentroidalSetup, ComPolicy, LF, RF};
use crate::constraints::{FrictionBounds, SlidingSpec};
use crate::csa::{ContactMode, ContactPatch, CsaMiddle, Point2};
use crate::qp::QpStatus;
use crate::spatial::{Vec3, Vec6};
use crate::{Error, G_MAG};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    /// CoM stiffness K [1/s²].
    pub k_com: f64,
    /// CoM damping B [1/s].
    pub b_com: f64,
    /// Admittance per contact-frame wrench axis.
    pub admittance: Vec6,
    /// Foot force difference gain A_z [m/(N·s)].
    pub a_z: f64,
    /// Posture regulator stiffness [1/s²].
    pub k_posture: f64,
}

impl Gains {
    /// Gains with critically damped CoM task (B = 2√K).
    pub fn critically_damped(k_com: f64, admittance: Vec6, a_z: f64, k_posture: f64) -> Result<Self, Error> {
        let g = Self { k_com, b_com: 2.0 * libm::sqrt(k_com), admittance, a_z, k_posture };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.k_com > 0.0 && self.b_com > 0.0 && self.a_z >= 0.0 && self.k_posture > 0.0) {
            return Err(Error::InvalidInput("gains need k_com, b_com, k_posture > 0 and a_z ≥ 0".into()));
        }
        if self.admittance.iter().any(|&a| !(a >= 0.0)) {
            return Err(Error::InvalidInput("admittance entries must be ≥ 0".into()));
        }
        Ok(())
    }
}

/// K(c_d − c) + B(ċ_d − ċ) + c̈_d
pub fn com_task_accel(c: &Vec3, c_dot: &Vec3, c_des: &Vec3, c_dot_des: &Vec3, c_ddot_des: &Vec3, gains: &Gains) -> Vec3 {
    (c_des - c) * gains.k_com + (c_dot_des - c_dot) * gains.b_com + c_ddot_des
}

/// p_i += 𝒜_i (w_des,i − w_meas,i) dt; axes with 𝒜_i = 0 hold position.
pub fn admittance_update(p: &Vec6, w_meas: &Vec6, w_des: &Vec6, admittance: &Vec6, dt: f64) -> Vec6 {
    p + admittance.component_mul(&(w_des - w_meas)) * dt
}

/// K(q_ref − q) − 2√K q̇ on an abstract configuration vector.
pub fn posture_regulator(q: &[f64], q_dot: &[f64], q_ref: &[f64], k: f64) -> Result<Vec<f64>, Error> {
    if q.len() != q_dot.len() || q.len() != q_ref.len() {
        return Err(Error::DimensionMismatch("posture vectors must have equal length"));
    }
    let d = 2.0 * libm::sqrt(k);
    Ok(q.iter().zip(q_dot).zip(q_ref).map(|((q, qd), r)| k * (r - q) - d * qd).collect())
}

/// One step of ż = A_z((f_lf − f_rf) − (f_lf_des − f_rf_des)). Returns the new
/// offset and ż; the caller moves the left foot by −ż and the right by +ż.
pub fn foot_force_difference_step(
    f_lf: f64,
    f_rf: f64,
    f_lf_des: f64,
    f_rf_des: f64,
    a_z: f64,
    dt: f64,
    z: f64,
) -> (f64, f64) {
    let z_dot = a_z * ((f_lf - f_rf) - (f_lf_des - f_rf_des));
    (z + z_dot * dt, z_dot)
}

/// Piecewise-linear scalar profile, held constant outside its knots.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub knots: Vec<(f64, f64)>,
}

impl Profile {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self, Error> {
        check_times(knots.iter().map(|k| k.0))?;
        Ok(Self { knots })
    }

    pub fn constant(v: f64) -> Self {
        Self { knots: alloc::vec![(0.0, v)] }
    }

    pub fn eval(&self, t: f64) -> f64 {
        interpolate(&self.knots, t, |a, b, s| a + (b - a) * s)
    }

    pub fn max(&self) -> f64 {
        self.knots.iter().map(|k| k.1).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Piecewise-linear hand path: tangential offsets (along tangent 1 and 2 of
/// the hand contact) from the initial hand position.
#[derive(Debug, Clone, PartialEq)]
pub struct HandPath {
    pub knots: Vec<(f64, Point2)>,
}

impl HandPath {
    pub fn new(knots: Vec<(f64, Point2)>) -> Result<Self, Error> {
        check_times(knots.iter().map(|k| k.0))?;
        Ok(Self { knots })
    }

    pub fn eval(&self, t: f64) -> Point2 {
        interpolate(&self.knots, t, |a, b, s| a + (b - a) * s)
    }

    /// Velocity on the segment containing t (zero outside the path).
    pub fn velocity(&self, t: f64) -> Point2 {
        for w in self.knots.windows(2) {
            if t >= w[0].0 && t < w[1].0 {
                return (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            }
        }
        Point2::zeros()
    }

    /// Direction of motion at t; while stationary, the direction of the next
    /// moving segment (or the last one, after the path ends).
    pub fn direction(&self, t: f64) -> Option<Point2> {
        let moving = |w: &[(f64, Point2)]| {
            let d = w[1].1 - w[0].1;
            (d.norm() > 0.0).then(|| d.normalize())
        };
        let v = self.velocity(t);
        if v.norm() > 0.0 {
            return Some(v.normalize());
        }
        let segs: Vec<_> = self.knots.windows(2).collect();
        segs.iter().filter(|w| w[0].0 >= t).find_map(|w| moving(w)).or_else(|| segs.iter().rev().find_map(|w| moving(w)))
    }
}

fn check_times(times: impl Iterator<Item = f64>) -> Result<(), Error> {
    let mut prev = f64::NEG_INFINITY;
    let mut count = 0;
    for t in times {
        if !(t > prev) || !t.is_finite() {
            return Err(Error::InvalidInput("profile times must be finite and strictly increasing".into()));
        }
        prev = t;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidInput("profile needs at least one knot".into()));
    }
    Ok(())
}

fn interpolate<T: Copy>(knots: &[(f64, T)], t: f64, lerp: impl Fn(T, T, f64) -> T) -> T {
    if t <= knots[0].0 {
        return knots[0].1;
    }
    for w in knots.windows(2) {
        if t <= w[1].0 {
            return lerp(w[0].1, w[1].1, (t - w[0].0) / (w[1].0 - w[0].0));
        }
    }
    knots[knots.len() - 1].1
}

/// Surrogate environment for the hand and the feet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactModel {
    /// Surface stiffness along the pressing axis [N/m].
    pub wall_stiffness: f64,
    /// Lag of the measured hand force [s].
    pub time_constant: f64,
    /// Surface height change per metre of tangential travel (tangent 1, 2).
    pub surface_slope: Point2,
    /// Vertical stiffness used by the foot force difference loop [N/m].
    pub foot_stiffness: f64,
}

impl Default for ContactModel {
    fn default() -> Self {
        Self { wall_stiffness: 1e4, time_constant: 0.05, surface_slope: Point2::zeros(), foot_stiffness: 1e5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mass: f64,
    pub g_mag: f64,
    /// Right foot, left foot.
    pub feet: [ContactPatch; 2],
    /// (fz_min, fz_max) per foot.
    pub foot_force_limits: [(f64, f64); 2],
    /// Hand contact at its initial pose on the surface.
    pub hand: ContactPatch,
    pub hand_force_limits: (f64, f64),
    /// Pressing force target over time [N].
    pub force_profile: Profile,
    pub wipe_path: Option<HandPath>,
    pub gains: Gains,
    pub dt: f64,
    pub t_end: f64,
    pub com_policy: ComPolicy,
    pub csa_middle: CsaMiddle,
    pub contact_model: ContactModel,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), Error> {
        self.gains.validate()?;
        if !(self.mass > 0.0 && self.g_mag > 0.0) {
            return Err(Error::InvalidInput("mass and gravity must be positive".into()));
        }
        if !(self.dt > 0.0 && self.t_end >= 0.0) {
            return Err(Error::InvalidInput("dt must be positive and t_end non-negative".into()));
        }
        if self.force_profile.knots.iter().any(|k| !(k.1 >= 0.0)) {
            return Err(Error::InvalidInput("pressing forces must be non-negative".into()));
        }
        if self.hand.mode == ContactMode::Sliding {
            let path = self.wipe_path.as_ref().ok_or_else(|| Error::InvalidInput("sliding hand needs a wipe path".into()))?;
            if path.direction(0.0).is_none() {
                return Err(Error::InvalidInput("wipe path never moves".into()));
            }
            if self.force_profile.knots.iter().any(|k| !(k.1 > 0.0)) {
                return Err(Error::InvalidInput("a sliding hand needs a positive pressing force throughout".into()));
            }
        }
        let m = &self.contact_model;
        if !(m.wall_stiffness > 0.0 && m.time_constant >= 0.0 && m.foot_stiffness > 0.0) {
            return Err(Error::InvalidInput("contact model needs positive stiffnesses and τ ≥ 0".into()));
        }
        Ok(())
    }

    pub fn weight(&self) -> f64 {
        self.mass * self.g_mag
    }

    /// Hand target for a pressing force at time t.
    pub fn hand_target(&self, t: f64, normal_force: f64) -> Result<SlidingSpec, Error> {
        match (self.hand.mode, &self.wipe_path) {
            (ContactMode::Sliding, Some(path)) => {
                let d = path.direction(t).ok_or_else(|| Error::InvalidInput("wipe path never moves".into()))?;
                SlidingSpec::opposing(normal_force, Vector2::new(d.x, d.y), self.hand.mu)
            }
            (ContactMode::Sliding, None) => Err(Error::InvalidInput("sliding hand needs a wipe path".into())),
            (ContactMode::Fixed, _) => Ok(SlidingSpec::push(normal_force)),
        }
    }

    /// Centroidal setup with the hand at `hand` and the given force target.
    pub fn setup_with(&self, hand: ContactPatch, target: SlidingSpec, policy: ComPolicy) -> Result<CentroidalSetup, Error> {
        let fb = |p: &ContactPatch, (lo, hi): (f64, f64)| FrictionBounds::for_patch(p, lo, hi);
        let bounds = [
            fb(&self.feet[0], self.foot_force_limits[0])?,
            fb(&self.feet[1], self.foot_force_limits[1])?,
            fb(&hand, self.hand_force_limits)?,
        ];
        let mut s = CentroidalSetup::new(self.mass, self.feet, hand, Some(target), bounds)?;
        s.g_mag = self.g_mag;
        s.com_policy = policy;
        s.middle = self.csa_middle;
        Ok(s)
    }

    /// Static setup at the initial hand pose with an explicit pressing force.
    pub fn static_setup(&self, t: f64, normal_force: f64, policy: ComPolicy) -> Result<CentroidalSetup, Error> {
        self.setup_with(self.hand, self.hand_target(t, normal_force)?, policy)
    }
}

impl Default for Scenario {
    /// HRP-4-like stance pressing on a wall in front of the right hand.
    fn default() -> Self {
        use crate::csa::NormalAxis;
        use crate::spatial::ContactPose;
        let foot = |y: f64| ContactPatch::foot(ContactPose::at(Vec3::new(0.0, y, 0.0)), 0.05, 0.04, 0.7).unwrap();
        let hand = ContactPatch::new(
            ContactPose::at(Vec3::new(0.30, -0.20, 1.10)),
            0.03,
            0.03,
            0.5,
            ContactMode::Fixed,
            NormalAxis::X,
        )
        .unwrap();
        Self {
            mass: 39.0,
            g_mag: G_MAG,
            feet: [foot(-0.09), foot(0.09)],
            foot_force_limits: [(0.0, 2000.0); 2],
            hand,
            hand_force_limits: (0.0, 500.0),
            force_profile: Profile::new(alloc::vec![(0.0, 0.0), (2.0, 0.0), (12.0, 60.0), (22.0, 60.0), (32.0, 0.0)]).unwrap(),
            wipe_path: None,
            gains: Gains::critically_damped(25.0, Vec6::new(1e-3, 0.0, 0.0, 0.0, 0.0, 0.0), 2.5e-5, 9.0).unwrap(),
            dt: 0.005,
            t_end: 35.0,
            com_policy: ComPolicy::Free,
            csa_middle: CsaMiddle::Centroid,
            contact_model: ContactModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub com: Vec3,
    pub com_vel: Vec3,
    /// World hand position.
    pub hand_pos: Vec3,
    /// Measured hand wrench on the robot, hand contact frame.
    pub measured_hand_wrench: Vec6,
    /// Measured vertical foot loads (lf, rf).
    pub foot_fz: (f64, f64),
    pub virtual_offset_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub com: Vec3,
    pub com_des: Point2,
    pub f_hand_meas: f64,
    pub f_hand_des: f64,
    pub fz_lf: f64,
    pub fz_rf: f64,
    pub csa_vertices: Vec<Point2>,
    pub status: QpStatus,
    pub ne_residual: f64,
    pub slide_residual: f64,
    /// Whether the commanded CoM lies in this tick's CSA.
    pub com_in_csa: bool,
}

/// Runs the scenario until `t_end` or the first infeasible tick, which is
/// recorded with commands frozen at the last feasible values.
pub fn run_scenario(sc: &Scenario) -> Result<Vec<TraceRecord>, Error> {
    sc.validate()?;
    let dt = sc.dt;
    let model = &sc.contact_model;
    let ticks = libm::round(sc.t_end / dt) as usize;
    let alpha = if model.time_constant > 0.0 { dt / (model.time_constant + dt) } else { 1.0 };
    let [t1, t2, n_in] = sc.hand.normal_axis.canonical_axes();
    let (yr, yl) = (sc.feet[RF].pose.position.y, sc.feet[LF].pose.position.y);

    let start = sc.static_setup(0.0, sc.force_profile.eval(0.0), ComPolicy::Free)?;
    let start_com = start.desired_csa()?.middle(sc.csa_middle);
    let mut state = SimState {
        t: 0.0,
        com: Vec3::new(start_com.x, start_com.y, 0.0),
        com_vel: Vec3::zeros(),
        hand_pos: sc.hand.pose.position,
        measured_hand_wrench: Vec6::zeros(),
        foot_fz: (0.5 * sc.weight(), 0.5 * sc.weight()),
        virtual_offset_z: 0.0,
    };
    // hand displacement in the contact frame driven by admittance
    let mut p_adm = Vec6::zeros();
    let mut f_meas = 0.0;
    let mut records: Vec<TraceRecord> = Vec::with_capacity(ticks + 1);

    for tick in 0..=ticks {
        let t = tick as f64 * dt;
        state.t = t;
        let f_des = sc.force_profile.eval(t);
        let tangential = sc.wipe_path.as_ref().map_or(Point2::zeros(), |p| p.eval(t));
        let local = p_adm.fixed_rows::<3>(0) + t1 * tangential.x + t2 * tangential.y;
        state.hand_pos = sc.hand.pose.transform_point(&local);

        let mut hand = sc.hand;
        hand.pose.position = state.hand_pos;
        let target = sc.hand_target(t, f_des)?;
        let setup = sc.setup_with(hand, target, sc.com_policy)?;
        let result = match solve_centroidal(&setup) {
            Ok(r) => r,
            Err(Error::BalanceInfeasible(_)) => {
                let mut last = records.last().cloned().unwrap_or_else(|| TraceRecord {
                    t,
                    com: state.com,
                    com_des: state.com.xy(),
                    f_hand_meas: f_meas,
                    f_hand_des: f_des,
                    fz_lf: state.foot_fz.0,
                    fz_rf: state.foot_fz.1,
                    csa_vertices: Vec::new(),
                    status: QpStatus::Infeasible,
                    ne_residual: 0.0,
                    slide_residual: 0.0,
                    com_in_csa: false,
                });
                last.t = t;
                last.f_hand_des = f_des;
                last.status = QpStatus::Infeasible;
                records.push(last);
                break;
            }
            Err(e) => return Err(e),
        };

        // CoM plant
        let c_des = Vec3::new(result.y.com.x, result.y.com.y, 0.0);
        let acc = com_task_accel(&state.com, &state.com_vel, &c_des, &Vec3::zeros(), &Vec3::zeros(), &sc.gains);
        state.com_vel += acc * dt;
        state.com += state.com_vel * dt;

        // hand admittance on wrenches applied by the robot
        let w_des = -result.y.w_rh.to_vector();
        let w_meas = -state.measured_hand_wrench;
        p_adm = admittance_update(&p_adm, &w_meas, &w_des, &sc.gains.admittance, dt);

        // surface response and measurement lag
        let surface = model.surface_slope.x * tangential.x + model.surface_slope.y * tangential.y;
        let depth = -n_in.dot(&p_adm.fixed_rows::<3>(0).into_owned()) - surface;
        let f_env = model.wall_stiffness * depth.max(0.0);
        f_meas += alpha * (f_env - f_meas);
        let mut w = Vec6::zeros();
        w.fixed_rows_mut::<3>(0).copy_from(&(target.contact_force(sc.hand.normal_axis) * (f_meas / f_des.max(1e-12))));
        if f_des <= 1e-12 {
            w.fixed_rows_mut::<3>(0).copy_from(&(n_in * f_meas));
        }
        state.measured_hand_wrench = w;

        // foot loads: lever at the actual CoM, shifted by the compliance term
        let hand_world = sc.hand.pose.rotation * w.fixed_rows::<3>(0);
        let total = sc.weight() - hand_world.z;
        let offset = crate::csa::sliding_offset(&state.hand_pos, &hand_world, sc.weight());
        let scale = total / sc.weight();
        let c_eff = (state.com.y - offset.y) / scale;
        let share_l = (c_eff - yr) / (yl - yr);
        let k_f = model.foot_stiffness;
        let f_lf = total * share_l - k_f * state.virtual_offset_z;
        let f_rf = total * (1.0 - share_l) + k_f * state.virtual_offset_z;
        let (z, _) = foot_force_difference_step(
            f_lf,
            f_rf,
            result.world_wrenches[LF].force.z,
            result.world_wrenches[RF].force.z,
            sc.gains.a_z,
            dt,
            state.virtual_offset_z,
        );
        state.virtual_offset_z = z;
        state.foot_fz = (f_lf, f_rf);

        let com_des = Point2::new(result.y.com.x, result.y.com.y);
        records.push(TraceRecord {
            t,
            com: state.com,
            com_des,
            f_hand_meas: f_meas,
            f_hand_des: f_des,
            fz_lf: f_lf,
            fz_rf: f_rf,
            com_in_csa: crate::csa::contains(&result.csa, &com_des),
            csa_vertices: result.csa.vertices,
            status: result.status,
            ne_residual: result.newton_euler_residual,
            slide_residual: result.sliding_residual,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gains(k: f64) -> Gains {
        Gains::critically_damped(k, Vec6::zeros(), 1e-4, k).unwrap()
    }

    #[test]
    fn com_task_examples() {
        let z = Vec3::zeros();
        assert_eq!(com_task_accel(&z, &z, &z, &z, &z, &gains(4.0)), z);
        let a = com_task_accel(&z, &z, &Vec3::new(1.0, 0.0, 0.0), &z, &z, &gains(4.0));
        assert_eq!(a, Vec3::new(4.0, 0.0, 0.0));
    }

    #[test]
    fn admittance_examples() {
        let p = Vec6::new(0.1, 0.2, 0.3, 0.0, 0.0, 0.0);
        let w = Vec6::new(1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let a = Vec6::from_element(1e-3);
        assert_eq!(admittance_update(&p, &w, &w, &a, 0.005), p);
        assert_eq!(admittance_update(&p, &Vec6::zeros(), &w, &Vec6::zeros(), 0.005), p);
        let a = Vec6::new(1e-4, 0.0, 0.0, 0.0, 0.0, 0.0);
        let err = Vec6::new(30.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        let p2 = admittance_update(&Vec6::zeros(), &Vec6::zeros(), &err, &a, 0.005);
        assert!((p2[0] - 1.5e-5).abs() < 1e-18);
    }

    #[test]
    fn posture_examples() {
        assert_eq!(posture_regulator(&[0.3], &[0.0], &[0.3], 9.0).unwrap(), [0.0]);
        assert_eq!(posture_regulator(&[0.0, 1.0], &[0.0, 0.0], &[1.0, 1.0], 9.0).unwrap(), [9.0, 0.0]);
        assert!(posture_regulator(&[0.0], &[0.0, 0.0], &[0.0], 9.0).is_err());
    }

    #[test]
    fn foot_difference_examples() {
        assert_eq!(foot_force_difference_step(200.0, 100.0, 200.0, 100.0, 1e-4, 0.005, 0.0).1, 0.0);
        let (z, zd) = foot_force_difference_step(150.0, 50.0, 100.0, 100.0, 1e-4, 0.005, 0.0);
        assert!((zd - 0.01).abs() < 1e-15);
        assert!((z - 5e-5).abs() < 1e-15);
    }

    #[test]
    fn profile_and_path() {
        let p = Profile::new(alloc::vec![(0.0, 0.0), (2.0, 10.0)]).unwrap();
        assert_eq!((p.eval(-1.0), p.eval(1.0), p.eval(5.0)), (0.0, 5.0, 10.0));
        assert!(Profile::new(alloc::vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
        let path = HandPath::new(alloc::vec![
            (0.0, Point2::zeros()),
            (1.0, Point2::zeros()),
            (2.0, Point2::new(0.0, 0.5)),
        ])
        .unwrap();
        assert_eq!(path.velocity(1.5), Point2::new(0.0, 0.5));
        assert_eq!(path.direction(0.2), Some(Point2::new(0.0, 1.0)));
        assert_eq!(path.direction(3.0), Some(Point2::new(0.0, 1.0)));
    }

    #[test]
    fn default_scenario_is_valid() {
        let sc = Scenario::default();
        sc.validate().unwrap();
        let mut short = sc.clone();
        short.t_end = 0.5;
        let recs = run_scenario(&short).unwrap();
        assert_eq!(recs.len(), 101);
        assert!(recs.iter().all(|r| r.status == QpStatus::Optimal));
    }
}
