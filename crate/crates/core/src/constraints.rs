//! Inequality and equality rows of the centroidal QP.
//!
//! Fixed contacts get the rectangular-patch contact wrench cone: pyramidal
//! friction, a bounded normal force, CoP limits on the tangential torques and
//! the yaw-torque bounds
//!
//! ```text
//! τ_n^min = −μ(X+Y) f_n + |Y f_t1 − μ τ_t1| + |X f_t2 − μ τ_t2|
//! τ_n^max =  μ(X+Y) f_n − |Y f_t1 + μ τ_t1| − |X f_t2 + μ τ_t2|
//! ```
//!
//! where X, Y are the patch half-lengths along the two tangents. Each absolute
//! value is expanded into its sign cases, giving four Ψ rows per bound. A
//! sliding contact keeps only the CoP rows; its force is pinned to the cone
//! edge by equalities.
//!
//! All blocks are first built in a canonical frame (tangent 1, tangent 2,
//! inward normal = local z) and then mapped onto the contact frame selected by
//! the patch's [`NormalAxis`].

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, Matrix4x6, Matrix6, Vector2};

use crate::csa::{ContactMode, ContactPatch, NormalAxis};
use crate::spatial::{Vec3, Vec6, Wrench};
use crate::Error;

/// Columns of the CoM block and of each contact block in the decision vector.
pub const COM_OFFSET: usize = 0;
pub const CONTACT_OFFSETS: [usize; 3] = [3, 9, 15];
pub const DECISION_LEN: usize = 21;

const ROWS_PER_CONTACT_CONE: usize = 12;
const ROWS_PER_CONTACT_YAW: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrictionBounds {
    pub mu: f64,
    pub half_x: f64,
    pub half_y: f64,
    pub fz_min: f64,
    pub fz_max: f64,
}

impl FrictionBounds {
    pub fn new(mu: f64, half_x: f64, half_y: f64, fz_min: f64, fz_max: f64) -> Result<Self, Error> {
        if !(mu > 0.0) || !(half_x > 0.0) || !(half_y > 0.0) {
            return Err(Error::InvalidInput(alloc::format!(
                "friction bounds need mu, half_x, half_y > 0 (got {mu}, {half_x}, {half_y})"
            )));
        }
        if !(fz_min >= 0.0 && fz_min < fz_max) {
            return Err(Error::InvalidInput(alloc::format!(
                "normal force bounds need 0 ≤ fz_min < fz_max (got {fz_min}, {fz_max})"
            )));
        }
        Ok(Self { mu, half_x, half_y, fz_min, fz_max })
    }

    pub fn for_patch(patch: &ContactPatch, fz_min: f64, fz_max: f64) -> Result<Self, Error> {
        Self::new(patch.mu, patch.half_x, patch.half_y, fz_min, fz_max)
    }
}

/// Force target for the hand: pressing force plus tangential components per
/// unit pressing force along the canonical tangents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlidingSpec {
    pub normal_force: f64,
    pub ratio_t1: f64,
    pub ratio_t2: f64,
}

impl SlidingSpec {
    /// Sliding target on the cone edge, with friction opposing the tangential
    /// velocity `direction` (components along tangent 1 and 2).
    pub fn opposing(normal_force: f64, direction: Vector2<f64>, mu: f64) -> Result<Self, Error> {
        let n = direction.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidInput("sliding direction must be non-zero".into()));
        }
        let r = -direction * (mu / n);
        Ok(Self { normal_force, ratio_t1: r.x, ratio_t2: r.y })
    }

    /// Pure pressing target with no tangential force.
    pub fn push(normal_force: f64) -> Self {
        Self { normal_force, ratio_t1: 0.0, ratio_t2: 0.0 }
    }

    pub fn tangential_ratio(&self) -> f64 {
        libm::hypot(self.ratio_t1, self.ratio_t2)
    }

    /// A sliding contact must sit on the cone edge; a fixed contact may use the
    /// spec as a force pin anywhere inside the cone.
    pub fn validate(&self, mu: f64, mode: ContactMode) -> Result<(), Error> {
        let r = self.tangential_ratio();
        match mode {
            ContactMode::Sliding => {
                if !(self.normal_force > 0.0) {
                    return Err(Error::InvalidInput("sliding normal force must be positive".into()));
                }
                if (r - mu).abs() > 1e-9 {
                    return Err(Error::InvalidInput(alloc::format!(
                        "sliding force must lie on the cone edge: |ratio| = {r}, mu = {mu}"
                    )));
                }
            }
            ContactMode::Fixed => {
                if !(self.normal_force >= 0.0) {
                    return Err(Error::InvalidInput("pressing force must be non-negative".into()));
                }
                if r > mu + 1e-9 {
                    return Err(Error::InvalidInput(alloc::format!(
                        "pinned force outside the friction cone: |ratio| = {r}, mu = {mu}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Contact-frame force realizing the target.
    pub fn contact_force(&self, axis: NormalAxis) -> Vec3 {
        let [t1, t2, n] = axis.canonical_axes();
        (n + t1 * self.ratio_t1 + t2 * self.ratio_t2) * self.normal_force
    }
}

/// Contact-frame → canonical (t1, t2, n) map for force and torque.
pub fn canonical_map(axis: NormalAxis) -> Matrix6<f64> {
    let axes = axis.canonical_axes();
    let mut c = Matrix6::zeros();
    for (i, a) in axes.iter().enumerate() {
        for j in 0..3 {
            c[(i, j)] = a[j];
            c[(i + 3, j + 3)] = a[j];
        }
    }
    c
}

/// Contact-frame → "x-slot" layout (n, t1, t2, τ_n, τ_t1, τ_t2) used by the
/// sliding equalities.
pub fn slot_map(axis: NormalAxis) -> Matrix6<f64> {
    let c = canonical_map(axis);
    let order = [2, 0, 1, 5, 3, 4];
    Matrix6::from_fn(|i, j| c[(order[i], j)])
}

/// Yaw-torque bounds for a wrench whose normal is local z.
pub fn tau_z_bounds(w: &Wrench, b: &FrictionBounds) -> (f64, f64) {
    let (f, t) = (&w.force, &w.torque);
    let (mu, x, y) = (b.mu, b.half_x, b.half_y);
    let min = -mu * (x + y) * f.z + (y * f.x - mu * t.x).abs() + (x * f.y - mu * t.y).abs();
    let max = mu * (x + y) * f.z - (y * f.x + mu * t.x).abs() - (x * f.y + mu * t.y).abs();
    (min, max)
}

/// Canonical Υ¹, Υ² for a fixed contact. Row i bounds component i; the
/// matching right-hand sides come from [`cone_rhs`].
pub fn upsilon_fixed(b: &FrictionBounds) -> (Matrix6<f64>, Matrix6<f64>) {
    let mut u1 = Matrix6::zeros();
    u1[(0, 0)] = 1.0;
    u1[(0, 2)] = -b.mu;
    u1[(1, 1)] = 1.0;
    u1[(1, 2)] = -b.mu;
    u1[(2, 2)] = 1.0;
    u1[(3, 2)] = -b.half_y;
    u1[(3, 3)] = 1.0;
    u1[(4, 2)] = -b.half_x;
    u1[(4, 4)] = 1.0;
    let mut u2 = u1;
    for i in 0..6 {
        u2[(i, i)] = -u1[(i, i)];
    }
    (u1, u2)
}

/// Canonical Υ¹, Υ² for a sliding contact: only the CoP rows remain.
pub fn upsilon_sliding(b: &FrictionBounds) -> (Matrix6<f64>, Matrix6<f64>) {
    let mut u1 = Matrix6::zeros();
    u1[(3, 2)] = -b.half_y;
    u1[(3, 3)] = 1.0;
    u1[(4, 2)] = -b.half_x;
    u1[(4, 4)] = 1.0;
    let mut u2 = u1;
    u2[(3, 3)] = -1.0;
    u2[(4, 4)] = -1.0;
    (u1, u2)
}

/// Canonical right-hand sides (h¹, h²) of the Υ rows.
pub fn cone_rhs(b: &FrictionBounds, mode: ContactMode) -> (Vec6, Vec6) {
    match mode {
        ContactMode::Fixed => (
            Vec6::new(0.0, 0.0, b.fz_max, 0.0, 0.0, 0.0),
            Vec6::new(0.0, 0.0, -b.fz_min, 0.0, 0.0, 0.0),
        ),
        ContactMode::Sliding => (Vec6::zeros(), Vec6::zeros()),
    }
}

fn canonical_psi(b: &FrictionBounds) -> (Matrix4x6<f64>, Matrix4x6<f64>) {
    let (mu, x, y) = (b.mu, b.half_x, b.half_y);
    let c = -mu * (x + y);
    let mut p1 = Matrix4x6::zeros();
    let mut p2 = Matrix4x6::zeros();
    for (row, (s1, s2)) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)].into_iter().enumerate() {
        let upper = [s1 * y, s2 * x, c, s1 * mu, s2 * mu, 1.0];
        let lower = [s1 * y, s2 * x, c, -s1 * mu, -s2 * mu, -1.0];
        for j in 0..6 {
            p1[(row, j)] = upper[j];
            p2[(row, j)] = lower[j];
        }
    }
    (p1, p2)
}

/// Ψ¹ (upper bound of the contact-frame normal torque) and Ψ² (lower bound),
/// each four sign expansions with zero right-hand side.
pub fn psi_matrices(b: &FrictionBounds, axis: NormalAxis) -> (Matrix4x6<f64>, Matrix4x6<f64>) {
    let (p1, p2) = canonical_psi(b);
    let c = canonical_map(axis);
    let (m1, m2) = (p1 * c, p2 * c);
    // the canonical normal torque is −τ_axis for approach frames
    if c[(5, 3 + axis.index())] < 0.0 {
        (m2, m1)
    } else {
        (m1, m2)
    }
}

/// Canonical Υ pair and right-hand sides mapped onto the contact frame. Rows
/// are re-indexed so that row j bounds contact component j.
pub fn upsilon_for_contact(
    b: &FrictionBounds,
    mode: ContactMode,
    axis: NormalAxis,
) -> (Matrix6<f64>, Matrix6<f64>, Vec6, Vec6) {
    let (u1, u2) = match mode {
        ContactMode::Fixed => upsilon_fixed(b),
        ContactMode::Sliding => upsilon_sliding(b),
    };
    let (h1, h2) = cone_rhs(b, mode);
    let c = canonical_map(axis);
    let target: [usize; 6] = core::array::from_fn(|i| (0..6).find(|&j| c[(i, j)] != 0.0).unwrap());
    let (m1, m2) = (u1 * c, u2 * c);
    let mut out = (Matrix6::zeros(), Matrix6::zeros(), Vec6::zeros(), Vec6::zeros());
    for i in 0..6 {
        out.0.set_row(target[i], &m1.row(i));
        out.1.set_row(target[i], &m2.row(i));
        out.2[target[i]] = h1[i];
        out.3[target[i]] = h2[i];
    }
    out
}

/// One contact's inequality inputs and its column offset in the decision
/// vector.
#[derive(Debug, Clone, Copy)]
pub struct ContactBlock {
    pub patch: ContactPatch,
    pub bounds: FrictionBounds,
    pub column: usize,
}

/// Stacked G (rows: all Υ blocks, then all Ψ blocks) and h.
pub fn build_inequalities(contacts: &[ContactBlock]) -> Result<(DMatrix<f64>, DVector<f64>), Error> {
    let n = 3 + 6 * contacts.len();
    for (i, c) in contacts.iter().enumerate() {
        let expected = 3 + 6 * i;
        if c.column != expected {
            return Err(Error::LayoutMismatch { contact: i, expected, found: c.column });
        }
    }
    let k = contacts.len();
    let mut g = DMatrix::zeros((ROWS_PER_CONTACT_CONE + ROWS_PER_CONTACT_YAW) * k, n);
    let mut h = DVector::zeros(g.nrows());
    for (i, c) in contacts.iter().enumerate() {
        let (u1, u2, h1, h2) = upsilon_for_contact(&c.bounds, c.patch.mode, c.patch.normal_axis);
        let row = ROWS_PER_CONTACT_CONE * i;
        g.view_mut((row, c.column), (6, 6)).copy_from(&u1);
        g.view_mut((row + 6, c.column), (6, 6)).copy_from(&u2);
        h.rows_mut(row, 6).copy_from(&h1);
        h.rows_mut(row + 6, 6).copy_from(&h2);

        let (p1, p2) = psi_matrices(&c.bounds, c.patch.normal_axis);
        let row = ROWS_PER_CONTACT_CONE * k + ROWS_PER_CONTACT_YAW * i;
        g.view_mut((row, c.column), (4, 6)).copy_from(&p1);
        g.view_mut((row + 4, c.column), (4, 6)).copy_from(&p2);
    }
    Ok((g, h))
}

/// (S¹ − S², k) in the x-slot layout: pins the pressing force and ties the
/// tangential forces to it. Torque rows are zero.
pub fn build_sliding_equalities(spec: &SlidingSpec) -> (Matrix6<f64>, Vec6) {
    let mut m = Matrix6::zeros();
    for i in 0..3 {
        m[(i, i)] = 1.0;
    }
    m[(1, 0)] = -spec.ratio_t1;
    m[(2, 0)] = -spec.ratio_t2;
    let k = Vec6::new(spec.normal_force, 0.0, 0.0, 0.0, 0.0, 0.0);
    (m, k)
}

/// Sliding equalities acting on contact-frame wrench components.
pub fn sliding_equalities_for_contact(spec: &SlidingSpec, axis: NormalAxis) -> (Matrix6<f64>, Vec6) {
    let (m, k) = build_sliding_equalities(spec);
    (m * slot_map(axis), k)
}

/// All constraint rows for rf, lf and the hand.
#[derive(Debug, Clone)]
pub struct ConstraintBlocks {
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    /// Hand equality block over the full decision vector (6 × 21).
    pub a_slide: DMatrix<f64>,
    pub k: Vec6,
}

pub fn build_constraint_blocks(
    contacts: &[ContactBlock; 3],
    hand_target: Option<&SlidingSpec>,
) -> Result<ConstraintBlocks, Error> {
    let (g, h) = build_inequalities(contacts)?;
    let mut a_slide = DMatrix::zeros(6, DECISION_LEN);
    let mut k = Vec6::zeros();
    if let Some(spec) = hand_target {
        let hand = &contacts[2];
        spec.validate(hand.patch.mu, hand.patch.mode)?;
        let (m, kk) = sliding_equalities_for_contact(spec, hand.patch.normal_axis);
        a_slide.view_mut((0, hand.column), (6, 6)).copy_from(&m);
        k = kk;
    } else if contacts[2].patch.mode == ContactMode::Sliding {
        return Err(Error::InvalidInput("sliding hand requires a sliding target".into()));
    }
    Ok(ConstraintBlocks { g, h, a_slide, k })
}

/// Rows of G that belong to contact `i` (cone rows then yaw rows).
pub fn contact_rows(i: usize, contacts: usize) -> Vec<usize> {
    let cone = ROWS_PER_CONTACT_CONE * i..ROWS_PER_CONTACT_CONE * (i + 1);
    let yaw_start = ROWS_PER_CONTACT_CONE * contacts + ROWS_PER_CONTACT_YAW * i;
    cone.chain(yaw_start..yaw_start + ROWS_PER_CONTACT_YAW).collect()
}
