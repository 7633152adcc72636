use comsupport_core::controller::*;
use comsupport_core::csa::{ContactMode, Point2};
use comsupport_core::qp::QpStatus;
use comsupport_core::spatial::{Vec3, Vec6};
use proptest::prelude::*;

fn gains(k: f64) -> Gains {
    Gains::critically_damped(k, Vec6::zeros(), 1e-4, k).unwrap()
}

/// Largest excursion past the target of the CoM task from rest.
fn com_overshoot(k: f64, dt: f64) -> (f64, f64) {
    let g = gains(k);
    let target = Vec3::new(0.3, -0.1, 0.0);
    let (mut c, mut v) = (Vec3::zeros(), Vec3::zeros());
    let mut worst: f64 = 0.0;
    let mut worst_analytic_gap: f64 = 0.0;
    let w = k.sqrt();
    let z = Vec3::zeros();
    for i in 1..=((10.0 / w) / dt) as usize {
        v += com_task_accel(&c, &v, &target, &z, &z, &g) * dt;
        c += v * dt;
        // overshoot means passing the target along the error direction
        worst = worst.max(c.x - target.x).max(target.y - c.y);
        let t = i as f64 * dt;
        let analytic = 1.0 - (1.0 + w * t) * (-w * t).exp();
        worst_analytic_gap = worst_analytic_gap.max((c.x / target.x - analytic).abs());
    }
    (worst, worst_analytic_gap)
}

#[test]
fn critically_damped_com_task_does_not_overshoot() {
    for k in [4.0, 25.0, 100.0] {
        let (over, gap) = com_overshoot(k, 1e-4);
        assert!(over <= 1e-6, "K = {k}: overshoot {over}");
        assert!(gap < 1e-2);
    }
}

#[test]
fn posture_regulator_converges_monotonically() {
    let k = 9.0;
    let q_ref = [0.5, -0.2, 0.0];
    let mut q = vec![0.0; 3];
    let mut qd = vec![0.0; 3];
    let dt = 1e-4;
    let mut prev_err = f64::INFINITY;
    for _ in 0..60_000 {
        let acc = posture_regulator(&q, &qd, &q_ref, k).unwrap();
        for i in 0..3 {
            qd[i] += acc[i] * dt;
            q[i] += qd[i] * dt;
        }
        let err = (q[0] - q_ref[0]).abs().max((q[1] - q_ref[1]).abs());
        assert!(err <= prev_err + 1e-12);
        assert!(q[0] <= q_ref[0] + 1e-6 && q[1] >= q_ref[1] - 1e-6);
        prev_err = err;
    }
    assert!(prev_err < 1e-6);
}

#[test]
fn foot_force_difference_decays_at_the_analytic_rate() {
    let (a_z, k, dt) = (2.5e-5, 1e5, 1e-4);
    let (f0, imbalance) = (190.0, 40.0);
    let (lf_des, rf_des) = (190.0, 190.0);
    let mut z = 0.0;
    let error = |z: f64| ((f0 + imbalance - k * z) - (f0 + k * z)) - (lf_des - rf_des);
    let e0 = error(z);
    let t_end = 0.5;
    for _ in 0..(t_end / dt) as usize {
        let (f_lf, f_rf) = (f0 + imbalance - k * z, f0 + k * z);
        z = foot_force_difference_step(f_lf, f_rf, lf_des, rf_des, a_z, dt, z).0;
    }
    let rate = -(error(z) / e0).ln() / t_end;
    let analytic = 2.0 * a_z * k;
    assert!((rate - analytic).abs() <= 0.05 * analytic, "rate {rate} vs {analytic}");
}

proptest! {
    #[test]
    fn admittance_holds_still_when_tracking(p in prop::array::uniform6(-1.0f64..1.0), w in prop::array::uniform6(-100.0f64..100.0)) {
        let p = Vec6::from_row_slice(&p);
        let w = Vec6::from_row_slice(&w);
        prop_assert_eq!(admittance_update(&p, &w, &w, &Vec6::from_element(1e-3), 0.005), p);
    }

    #[test]
    fn pure_position_axes_ignore_force_error(e in prop::array::uniform6(-100.0f64..100.0)) {
        let p = Vec6::new(0.1, 0.2, 0.3, 0.0, 0.0, 0.0);
        prop_assert_eq!(admittance_update(&p, &Vec6::zeros(), &Vec6::from_row_slice(&e), &Vec6::zeros(), 0.005), p);
    }
}

fn short_push() -> Scenario {
    Scenario {
        force_profile: Profile::new(vec![(0.0, 0.0), (0.5, 0.0), (2.0, 40.0)]).unwrap(),
        t_end: 3.0,
        ..Default::default()
    }
}

#[test]
fn every_tick_is_balanced_and_contained() {
    let recs = run_scenario(&short_push()).unwrap();
    assert_eq!(recs.len(), 601);
    for r in &recs {
        assert_eq!(r.status, QpStatus::Optimal);
        assert!(r.ne_residual <= 1e-6);
        assert!(r.com_in_csa);
    }
    let last = recs.last().unwrap();
    assert!((last.f_hand_meas - 40.0).abs() < 2.0);
}

#[test]
fn runs_are_deterministic() {
    let sc = short_push();
    assert_eq!(run_scenario(&sc).unwrap(), run_scenario(&sc).unwrap());
}

#[test]
fn infeasible_tick_ends_the_run() {
    let mut sc = short_push();
    sc.com_policy = comsupport_core::centroidal::ComPolicy::Fixed(Point2::zeros());
    let recs = run_scenario(&sc).unwrap();
    let last = recs.last().unwrap();
    assert_eq!(last.status, QpStatus::Infeasible);
    assert!(recs[..recs.len() - 1].iter().all(|r| r.status == QpStatus::Optimal));
    assert!(last.f_hand_des > 17.0 && last.f_hand_des < 19.0);
}

#[test]
fn sliding_without_a_path_is_rejected() {
    let mut sc = short_push();
    sc.hand.mode = ContactMode::Sliding;
    assert!(run_scenario(&sc).is_err());
}
