//! Independent oracles shared by the integration and acceptance tests. They
//! only use raw linear algebra and the problem definitions, never the
//! library's own geometry or constraint builders.

#![allow(dead_code)]

use comsupport_core::nalgebra::{DMatrix, DVector, Matrix3, Vector3};

/// Vertical balance with unilateral point forces at the given ground corners
/// (z = 0). `hand_force`, `hand_torque_origin` are the world hand force and its
/// torque about the world origin. Returns whether some λ ≥ 0 satisfies
///
/// ```text
/// Σλ_k = W − f_h^z
/// Σλ_k y_k + τ_h,x − W c_y = 0
/// −Σλ_k x_k + τ_h,y + W c_x = 0
/// ```
pub fn corner_forces_feasible(
    corners: &[[f64; 2]],
    hand_force_z: f64,
    hand_torque_origin: [f64; 2],
    weight: f64,
    com: [f64; 2],
) -> bool {
    let rhs = Vector3::new(
        weight - hand_force_z,
        weight * com[1] - hand_torque_origin[0],
        -weight * com[0] - hand_torque_origin[1],
    );
    let col = |k: usize| Vector3::new(1.0, corners[k][1], -corners[k][0]);
    let scale = rhs.x.abs().max(1.0);
    let n = corners.len();
    // a basic feasible solution uses at most three corners
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let m = Matrix3::from_columns(&[col(i), col(j), col(k)]);
                if m.determinant().abs() < 1e-12 {
                    continue;
                }
                if let Some(l) = m.lu().solve(&rhs) {
                    if l.iter().all(|&v| v >= -1e-12 * scale) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// `Some(answer)` when the oracle gives the same answer at the point and at
/// eight neighbours `band` away, `None` inside the boundary band.
pub fn corner_forces_feasible_robust(
    corners: &[[f64; 2]],
    hand_force_z: f64,
    hand_torque_origin: [f64; 2],
    weight: f64,
    com: [f64; 2],
    band: f64,
) -> Option<bool> {
    let base = corner_forces_feasible(corners, hand_force_z, hand_torque_origin, weight, com);
    for k in 0..8 {
        let a = k as f64 * core::f64::consts::FRAC_PI_4;
        let p = [com[0] + band * a.cos(), com[1] + band * a.sin()];
        if corner_forces_feasible(corners, hand_force_z, hand_torque_origin, weight, p) != base {
            return None;
        }
    }
    Some(base)
}

/// Minimizer of a strictly convex QP by enumerating active sets in order of
/// size. The first set whose equality-constrained solution is primal feasible
/// with non-negative multipliers is optimal (and unique for P ≻ 0).
pub fn active_set_oracle(
    p: &DMatrix<f64>,
    q: &DVector<f64>,
    g: &DMatrix<f64>,
    h: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Option<DVector<f64>> {
    let n = q.len();
    let m = h.len();
    let pe = b.len();
    let max_size = m.min(n.saturating_sub(pe));
    let mut subset: Vec<usize> = Vec::new();
    for size in 0..=max_size {
        let mut found = None;
        combinations(m, size, &mut subset, 0, &mut |set| {
            if found.is_some() {
                return;
            }
            let k = set.len();
            let dim = n + pe + k;
            let mut kkt = DMatrix::zeros(dim, dim);
            let mut rhs = DVector::zeros(dim);
            kkt.view_mut((0, 0), (n, n)).copy_from(p);
            rhs.rows_mut(0, n).copy_from(&(-q));
            for r in 0..pe {
                for c in 0..n {
                    kkt[(n + r, c)] = a[(r, c)];
                    kkt[(c, n + r)] = a[(r, c)];
                }
                rhs[n + r] = b[r];
            }
            for (r, &i) in set.iter().enumerate() {
                for c in 0..n {
                    kkt[(n + pe + r, c)] = g[(i, c)];
                    kkt[(c, n + pe + r)] = g[(i, c)];
                }
                rhs[n + pe + r] = h[i];
            }
            let lu = kkt.lu();
            if lu.determinant().abs() < 1e-14 {
                return;
            }
            let Some(sol) = lu.solve(&rhs) else { return };
            let y = sol.rows(0, n).into_owned();
            let duals_ok = (0..k).all(|r| sol[n + pe + r] >= -1e-9);
            let primal_ok = (g * &y - h).iter().all(|&v| v <= 1e-9);
            if duals_ok && primal_ok {
                found = Some(y);
            }
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

fn combinations(m: usize, size: usize, cur: &mut Vec<usize>, start: usize, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == size {
        f(cur);
        return;
    }
    for i in start..m {
        if m - i < size - cur.len() {
            break;
        }
        cur.push(i);
        combinations(m, size, cur, i + 1, f);
        cur.pop();
    }
}

/// Contact-frame wrench rewritten as (f_t1, f_t2, f_n, τ_t1, τ_t2, τ_n) with
/// the normal pointing into the robot. For a wall frame (axis X or Y) the
/// contact axis points into the surface.
pub fn to_tangent_normal(w: [f64; 6], axis: char) -> [f64; 6] {
    match axis {
        'z' => w,
        'x' => [w[2], w[1], -w[0], w[5], w[4], -w[3]],
        'y' => [w[0], w[2], -w[1], w[3], w[5], -w[4]],
        _ => panic!("axis"),
    }
}

pub struct Limits {
    pub mu: f64,
    pub half_x: f64,
    pub half_y: f64,
    pub fz_min: f64,
    pub fz_max: f64,
}

/// Largest violation of the scalar contact conditions written directly from
/// the definitions; ≤ 0 means admissible. A sliding contact keeps only the
/// CoP and yaw-torque conditions.
pub fn scalar_violation(w: [f64; 6], axis: char, l: &Limits, sliding: bool) -> f64 {
    let [ft1, ft2, fn_, tt1, tt2, tn] = to_tangent_normal(w, axis);
    let (mu, x, y) = (l.mu, l.half_x, l.half_y);
    let tmin = -mu * (x + y) * fn_ + (y * ft1 - mu * tt1).abs() + (x * ft2 - mu * tt2).abs();
    let tmax = mu * (x + y) * fn_ - (y * ft1 + mu * tt1).abs() - (x * ft2 + mu * tt2).abs();
    let mut v = vec![tt1.abs() - y * fn_, tt2.abs() - x * fn_, tmin - tn, tn - tmax];
    if !sliding {
        v.extend([ft1.abs() - mu * fn_, ft2.abs() - mu * fn_, fn_ - l.fz_max, l.fz_min - fn_]);
    }
    v.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

use comsupport_core::centroidal::CentroidalSetup;
use comsupport_core::constraints::{FrictionBounds, SlidingSpec};
use comsupport_core::csa::{ContactMode, ContactPatch, NormalAxis};
use comsupport_core::nalgebra::Vector2;
use comsupport_core::spatial::{ContactPose, Vec3};
use rand::Rng;

/// Random two-feet stance with a wall or table hand contact and a force
/// target. Not every draw is balanceable.
pub fn random_setup(rng: &mut impl Rng) -> CentroidalSetup {
    let foot = |rng: &mut dyn rand::RngCore, side: f64| {
        let pos = Vec3::new(rng.gen_range(-0.05..0.05), side * rng.gen_range(0.07..0.15), 0.0);
        let pose = ContactPose::from_yaw(pos, rng.gen_range(-0.3..0.3));
        ContactPatch::foot(pose, rng.gen_range(0.05..0.12), rng.gen_range(0.03..0.06), rng.gen_range(0.4..1.0)).unwrap()
    };
    let feet = [foot(rng, -1.0), foot(rng, 1.0)];
    let on_wall = rng.gen_bool(0.7);
    let mode = if rng.gen_bool(0.5) { ContactMode::Sliding } else { ContactMode::Fixed };
    let (axis, pos) = if on_wall {
        (NormalAxis::X, Vec3::new(rng.gen_range(0.2..0.5), rng.gen_range(-0.4..0.4), rng.gen_range(0.6..1.3)))
    } else {
        (NormalAxis::Z, Vec3::new(rng.gen_range(0.2..0.5), rng.gen_range(-0.4..0.4), rng.gen_range(0.6..1.0)))
    };
    let pose = ContactPose::from_yaw(pos, rng.gen_range(-0.4..0.4));
    let hand =
        ContactPatch::new(pose, rng.gen_range(0.02..0.05), rng.gen_range(0.02..0.05), rng.gen_range(0.3..0.9), mode, axis)
            .unwrap();
    let force = rng.gen_range(1.0..80.0);
    let target = match mode {
        ContactMode::Sliding => {
            let a: f64 = rng.gen_range(0.0..core::f64::consts::TAU);
            SlidingSpec::opposing(force, Vector2::new(a.cos(), a.sin()), hand.mu).unwrap()
        }
        ContactMode::Fixed => {
            let r = rng.gen_range(0.0..hand.mu);
            let a: f64 = rng.gen_range(0.0..core::f64::consts::TAU);
            SlidingSpec { normal_force: force, ratio_t1: r * a.cos(), ratio_t2: r * a.sin() }
        }
    };
    let fb = |p: &ContactPatch| FrictionBounds::for_patch(p, 0.0, 3000.0).unwrap();
    CentroidalSetup::new(rng.gen_range(30.0..80.0), feet, hand, Some(target), [fb(&feet[0]), fb(&feet[1]), fb(&hand)])
        .unwrap()
}
