//! Dense convex QP
//!
//! ```text
//! min ½ yᵀP y + qᵀy   s.t.   G y ≤ h,   A y = b
//! ```
//!
//! solved by a primal-dual interior point method with Mehrotra
//! predictor-corrector steps, followed by an active-set polish that solves the
//! KKT system of the identified active constraints directly. Dependent
//! equality rows are dropped (pivoted Gram-Schmidt); contradictory ones make the
//! problem infeasible. When the iterations do not converge, a phase-one
//! problem decides between `Infeasible` and `MaxIter`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;
use nalgebra::{DMatrix, DVector};

use crate::Error;

pub const MAX_ITER: usize = 100;
pub const STATIONARITY_TOL: f64 = 1e-6;
pub const FEASIBILITY_TOL: f64 = 1e-8;
pub const COMPLEMENTARITY_TOL: f64 = 1e-8;

const MAX_N: usize = 64;
const MAX_M: usize = 256;
const MAX_P: usize = 64;
const REG: f64 = 1e-10;
const RANK_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;
const CERT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// Farkas pair (z, y) for the inequality and equality rows.
pub type Certificate = (DVector<f64>, DVector<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub y: DVector<f64>,
    pub duals_ineq: DVector<f64>,
    pub duals_eq: DVector<f64>,
    pub status: QpStatus,
    /// Largest of the four KKT residuals.
    pub kkt_residual: f64,
    pub iterations: usize,
    /// Equality rows removed as linearly dependent.
    pub dropped_eq_rows: Vec<usize>,
    /// For `Infeasible`: (z, y) with z ≥ 0, Gᵀz + Aᵀy ≈ 0 and hᵀz + bᵀy < 0.
    pub certificate: Option<Certificate>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// ‖P y + q + Gᵀλ + Aᵀν‖∞
    pub stationarity: f64,
    /// max(0, max(G y − h))
    pub primal_ineq: f64,
    /// ‖A y − b‖∞
    pub primal_eq: f64,
    /// max |λ_i (h − G y)_i|, also covering negative λ_i
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.primal_ineq).max(self.primal_eq).max(self.complementarity)
    }

    pub fn is_optimal(&self) -> bool {
        self.stationarity <= STATIONARITY_TOL
            && self.primal_ineq <= FEASIBILITY_TOL
            && self.primal_eq <= FEASIBILITY_TOL
            && self.complementarity <= COMPLEMENTARITY_TOL
    }
}

impl QpProblem {
    pub fn new(
        p: DMatrix<f64>,
        q: DVector<f64>,
        g: DMatrix<f64>,
        h: DVector<f64>,
        a: DMatrix<f64>,
        b: DVector<f64>,
    ) -> Result<Self, Error> {
        let qp = Self { p, q, g, h, a, b };
        qp.validate()?;
        Ok(qp)
    }

    /// Problem without constraints.
    pub fn unconstrained(p: DMatrix<f64>, q: DVector<f64>) -> Result<Self, Error> {
        let n = q.len();
        Self::new(p, q, DMatrix::zeros(0, n), DVector::zeros(0), DMatrix::zeros(0, n), DVector::zeros(0))
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn validate(&self) -> Result<(), Error> {
        let n = self.q.len();
        if self.p.shape() != (n, n) {
            return Err(Error::DimensionMismatch("P must be n×n"));
        }
        if self.g.ncols() != n || self.g.nrows() != self.h.len() {
            return Err(Error::DimensionMismatch("G must be m×n with h of length m"));
        }
        if self.a.ncols() != n || self.a.nrows() != self.b.len() {
            return Err(Error::DimensionMismatch("A must be p×n with b of length p"));
        }
        if n == 0 || n > MAX_N || self.h.len() > MAX_M || self.b.len() > MAX_P {
            return Err(Error::DimensionMismatch("problem size outside 1 ≤ n ≤ 64, m ≤ 256, p ≤ 64"));
        }
        let finite = |m: &DMatrix<f64>| m.iter().all(|x| x.is_finite());
        let finite_v = |v: &DVector<f64>| v.iter().all(|x| x.is_finite());
        if !(finite(&self.p) && finite(&self.g) && finite(&self.a))
            || !(finite_v(&self.q) && finite_v(&self.h) && finite_v(&self.b))
        {
            return Err(Error::InvalidInput("QP data must be finite".into()));
        }
        let scale = self.p.amax().max(1.0);
        if (&self.p - self.p.transpose()).amax() > SYMMETRY_TOL * scale {
            return Err(Error::InvalidInput("P must be symmetric".into()));
        }
        Ok(())
    }

    pub fn objective(&self, y: &DVector<f64>) -> f64 {
        0.5 * y.dot(&(&self.p * y)) + self.q.dot(y)
    }
}

pub fn kkt_residuals(p: &QpProblem, s: &QpSolution) -> KktResiduals {
    residuals_at(p, &s.y, &s.duals_ineq, &s.duals_eq)
}

fn residuals_at(p: &QpProblem, y: &DVector<f64>, z: &DVector<f64>, nu: &DVector<f64>) -> KktResiduals {
    let grad = &p.p * y + &p.q + p.g.tr_mul(z) + p.a.tr_mul(nu);
    let slack = &p.h - &p.g * y;
    let primal_ineq = slack.iter().fold(0.0_f64, |acc, &s| acc.max(-s));
    let primal_eq = if p.b.is_empty() { 0.0 } else { (&p.a * y - &p.b).amax() };
    let mut comp = 0.0_f64;
    for i in 0..slack.len() {
        comp = comp.max((z[i] * slack[i]).abs()).max(-z[i]);
    }
    KktResiduals {
        stationarity: if grad.is_empty() { 0.0 } else { grad.amax() },
        primal_ineq,
        primal_eq,
        complementarity: comp,
    }
}

/// Problem after row cleanup: zero inequality rows removed, remaining rows of
/// G and A normalized, dependent equality rows dropped.
struct Reduced {
    g: DMatrix<f64>,
    h: DVector<f64>,
    g_rows: Vec<usize>,
    g_scale: Vec<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    a_rows: Vec<usize>,
    a_scale: Vec<f64>,
}

enum Prepared {
    Ready(Reduced, Vec<usize>),
    Infeasible(DVector<f64>, DVector<f64>, Vec<usize>),
}

fn prepare(p: &QpProblem) -> Prepared {
    let n = p.n();
    let (m, pe) = (p.h.len(), p.b.len());

    let mut g_rows = Vec::new();
    let mut g_scale = Vec::new();
    for i in 0..m {
        let norm = p.g.row(i).norm();
        if norm > 0.0 {
            g_rows.push(i);
            g_scale.push(norm);
        } else if p.h[i] < 0.0 {
            let mut z = DVector::zeros(m);
            z[i] = 1.0;
            return Prepared::Infeasible(z, DVector::zeros(pe), Vec::new());
        }
    }
    let g = DMatrix::from_fn(g_rows.len(), n, |r, c| p.g[(g_rows[r], c)] / g_scale[r]);
    let h = DVector::from_fn(g_rows.len(), |r, _| p.h[g_rows[r]] / g_scale[r]);

    // pivoted Gram-Schmidt on the rows of A
    let norms: Vec<f64> = (0..pe).map(|i| p.a.row(i).norm()).collect();
    let mut residual: Vec<DVector<f64>> = (0..pe).map(|i| p.a.row(i).transpose()).collect();
    let mut rb: Vec<f64> = p.b.iter().copied().collect();
    let mut kept: Vec<usize> = Vec::new();
    let mut remaining: Vec<usize> = (0..pe).collect();
    loop {
        let best = remaining
            .iter()
            .copied()
            .map(|i| (i, if norms[i] > 0.0 { residual[i].norm() / norms[i] } else { 0.0 }))
            .fold(None, |acc: Option<(usize, f64)>, (i, r)| match acc {
                Some((_, br)) if br >= r => acc,
                _ => Some((i, r)),
            });
        match best {
            Some((i, r)) if r > RANK_TOL => {
                let nrm = residual[i].norm();
                let qv = &residual[i] / nrm;
                let qb = rb[i] / nrm;
                remaining.retain(|&j| j != i);
                kept.push(i);
                for &j in &remaining {
                    let c = residual[j].dot(&qv);
                    residual[j] -= &qv * c;
                    rb[j] -= c * qb;
                }
            }
            _ => break,
        }
    }
    kept.sort_unstable();
    let dropped = remaining.clone();
    for &j in &dropped {
        // a dependent row must carry a right-hand side consistent with the rest
        if rb[j].abs() > 1e-9 * (1.0 + p.b[j].abs()) {
            return Prepared::Infeasible(DVector::zeros(m), contradiction_certificate(p, &kept, j), dropped);
        }
    }
    let a_scale: Vec<f64> = kept.iter().map(|&i| norms[i]).collect();
    let a = DMatrix::from_fn(kept.len(), n, |r, c| p.a[(kept[r], c)] / a_scale[r]);
    let b = DVector::from_fn(kept.len(), |r, _| p.b[kept[r]] / a_scale[r]);
    Prepared::Ready(Reduced { g, h, g_rows, g_scale, a, b, a_rows: kept, a_scale }, dropped)
}

/// y with Aᵀy ≈ 0 and bᵀy < 0 built from a dependent row j.
fn contradiction_certificate(p: &QpProblem, kept: &[usize], j: usize) -> DVector<f64> {
    let ak = DMatrix::from_fn(kept.len(), p.n(), |r, c| p.a[(kept[r], c)]);
    let gram = &ak * ak.transpose();
    let rhs = &ak * p.a.row(j).transpose();
    let coef = gram.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(kept.len()));
    let mut y = DVector::zeros(p.b.len());
    y[j] = 1.0;
    for (r, &i) in kept.iter().enumerate() {
        y[i] = -coef[r];
    }
    if p.b.dot(&y) > 0.0 {
        y = -y;
    }
    y
}

pub fn solve_qp(problem: &QpProblem) -> Result<QpSolution, Error> {
    problem.validate()?;
    solve_validated(problem, true)
}

fn solve_validated(problem: &QpProblem, phase_one: bool) -> Result<QpSolution, Error> {
    let (m, pe) = (problem.h.len(), problem.b.len());
    let (red, dropped) = match prepare(problem) {
        Prepared::Ready(r, d) => (r, d),
        Prepared::Infeasible(z, y, dropped) => {
            return Ok(infeasible(problem, z, y, 0, dropped));
        }
    };

    let ipm = interior_point(problem, &red)?;
    let (mut x, zr, yr, iterations) = (ipm.x, ipm.z, ipm.y, ipm.iterations);
    let (mut z, mut nu) = expand_duals(&red, &zr, &yr, m, pe);

    if let Some((cz, cy)) = ipm.certificate {
        let (cz, cy) = expand_duals(&red, &cz, &cy, m, pe);
        return Ok(infeasible(problem, cz, cy, iterations, dropped));
    }

    let mut res = residuals_at(problem, &x, &z, &nu);
    if let Some((px, pz, py)) = polish(problem, &red, &ipm.s, &zr) {
        let (pz, py) = expand_duals(&red, &pz, &py, m, pe);
        let pres = residuals_at(problem, &px, &pz, &py);
        if pres.is_optimal() || pres.max() < res.max() {
            x = px;
            z = pz;
            nu = py;
            res = pres;
        }
    }

    if res.is_optimal() {
        return Ok(QpSolution {
            y: x,
            duals_ineq: z,
            duals_eq: nu,
            status: QpStatus::Optimal,
            kkt_residual: res.max(),
            iterations,
            dropped_eq_rows: dropped,
            certificate: None,
        });
    }

    if phase_one {
        if let Some((cz, cy)) = phase_one_certificate(problem)? {
            return Ok(infeasible(problem, cz, cy, iterations, dropped));
        }
    }
    Ok(QpSolution {
        y: x,
        duals_ineq: z,
        duals_eq: nu,
        status: QpStatus::MaxIter,
        kkt_residual: res.max(),
        iterations,
        dropped_eq_rows: dropped,
        certificate: None,
    })
}

fn infeasible(problem: &QpProblem, z: DVector<f64>, y: DVector<f64>, iterations: usize, dropped: Vec<usize>) -> QpSolution {
    QpSolution {
        y: DVector::zeros(problem.n()),
        duals_ineq: DVector::zeros(problem.h.len()),
        duals_eq: DVector::zeros(problem.b.len()),
        status: QpStatus::Infeasible,
        kkt_residual: f64::INFINITY,
        iterations,
        dropped_eq_rows: dropped,
        certificate: Some((z, y)),
    }
}

fn expand_duals(red: &Reduced, z: &DVector<f64>, y: &DVector<f64>, m: usize, pe: usize) -> (DVector<f64>, DVector<f64>) {
    let mut zf = DVector::zeros(m);
    for (r, &i) in red.g_rows.iter().enumerate() {
        zf[i] = z[r] / red.g_scale[r];
    }
    let mut yf = DVector::zeros(pe);
    for (r, &i) in red.a_rows.iter().enumerate() {
        yf[i] = y[r] / red.a_scale[r];
    }
    (zf, yf)
}

struct IpmResult {
    x: DVector<f64>,
    s: DVector<f64>,
    z: DVector<f64>,
    y: DVector<f64>,
    iterations: usize,
    certificate: Option<Certificate>,
}

/// Factorization of the reduced Newton system
/// `[H Aᵀ; A 0]` with `H = P + Gᵀ diag(d) G + δI`.
struct Newton {
    h_chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    schur: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
    hinv_at: DMatrix<f64>,
}

impl Newton {
    fn factor(p: &DMatrix<f64>, g: &DMatrix<f64>, d: &DVector<f64>, a: &DMatrix<f64>) -> Option<Self> {
        let n = p.nrows();
        let mut gd = g.clone();
        for (mut row, di) in gd.row_iter_mut().zip(d.iter()) {
            row *= *di;
        }
        let base = p + g.tr_mul(&gd);
        let mut reg = REG;
        let h_chol = loop {
            let mut hm = base.clone();
            for i in 0..n {
                hm[(i, i)] += reg;
            }
            if let Some(c) = hm.cholesky() {
                break c;
            }
            reg *= 100.0;
            if reg > 1e-2 {
                return None;
            }
        };
        if a.nrows() == 0 {
            return Some(Self { h_chol, schur: None, hinv_at: DMatrix::zeros(n, 0) });
        }
        let hinv_at = h_chol.solve(&a.transpose());
        let mut s = a * &hinv_at;
        let mut reg = 0.0;
        let schur = loop {
            if let Some(c) = s.clone().cholesky() {
                break c;
            }
            reg = if reg == 0.0 { REG } else { reg * 100.0 };
            if reg > 1e-2 {
                return None;
            }
            for i in 0..s.nrows() {
                s[(i, i)] += reg;
            }
        };
        Some(Self { h_chol, schur: Some(schur), hinv_at })
    }

    /// Solves H dx + Aᵀ dy = r1, A dx = r2.
    fn solve(&self, r1: &DVector<f64>, r2: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let hr = self.h_chol.solve(r1);
        match &self.schur {
            None => (hr, DVector::zeros(0)),
            Some(sc) => {
                let dy = sc.solve(&(&self.hinv_at.tr_mul(r1) - r2));
                let dx = hr - &self.hinv_at * &dy;
                (dx, dy)
            }
        }
    }
}

fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    let mut alpha = f64::INFINITY;
    for i in 0..v.len() {
        if dv[i] < 0.0 {
            alpha = alpha.min(-v[i] / dv[i]);
        }
    }
    alpha
}

fn shift_positive(v: &mut DVector<f64>) {
    let t = v.iter().fold(f64::NEG_INFINITY, |acc, &x| acc.max(-x));
    if t >= -1e-8 * v.norm().max(1.0) {
        v.add_scalar_mut(1.0 + t);
    }
}

fn interior_point(problem: &QpProblem, red: &Reduced) -> Result<IpmResult, Error> {
    let p = &problem.p;
    let (g, h, a, b) = (&red.g, &red.h, &red.a, &red.b);
    let (m, pe) = (g.nrows(), a.nrows());

    let breakdown = || Error::NumericalBreakdown("KKT factorization failed after regularization");

    // starting point from the system with unit scaling
    let newton = Newton::factor(p, g, &DVector::from_element(m, 1.0), a).ok_or_else(breakdown)?;
    let (x0, y0) = newton.solve(&(-&problem.q + g.tr_mul(h)), b);
    let mut x = x0;
    let mut y = y0;
    if m == 0 {
        return Ok(IpmResult { x, s: DVector::zeros(0), z: DVector::zeros(0), y, iterations: 1, certificate: None });
    }
    let mut s = h - g * &x;
    let mut z = -s.clone();
    shift_positive(&mut s);
    shift_positive(&mut z);

    let scale = 1.0 + problem.q.amax().max(h.amax()).max(if pe > 0 { b.amax() } else { 0.0 });
    let mut iterations = 0;
    for it in 0..MAX_ITER {
        iterations = it + 1;
        let r_d = p * &x + &problem.q + g.tr_mul(&z) + a.tr_mul(&y);
        let r_p = a * &x - b;
        let r_i = g * &x + &s - h;
        let mu = s.dot(&z) / m as f64;

        let pres = r_i.amax().max(if pe > 0 { r_p.amax() } else { 0.0 });
        if r_d.amax() <= 1e-10 * scale && pres <= 1e-11 * scale && mu <= 1e-12 * scale {
            break;
        }

        // infeasibility certificate check on the current duals
        let gap = h.dot(&z) + b.dot(&y);
        if gap < 0.0 {
            let ray = g.tr_mul(&z) + a.tr_mul(&y);
            if ray.amax() <= CERT_TOL * gap.abs() {
                let certificate = Some((z.clone(), y.clone()));
                return Ok(IpmResult { x, s, z, y, iterations, certificate });
            }
        }

        let d = z.component_div(&s);
        let newton = match Newton::factor(p, g, &d, a) {
            Some(f) => f,
            None => break,
        };

        let direction = |r_c: &DVector<f64>| {
            // dz = S⁻¹(Z r_i − r_c) + D G dx
            let t = (z.component_mul(&r_i) - r_c).component_div(&s);
            let r1 = -&r_d - g.tr_mul(&t);
            let (dx, dy) = newton.solve(&r1, &(-&r_p));
            let ds = -&r_i - g * &dx;
            let dz = -(r_c + z.component_mul(&ds)).component_div(&s);
            (dx, dy, ds, dz)
        };

        let r_c = s.component_mul(&z);
        let (_, _, ds_a, dz_a) = direction(&r_c);
        let alpha_a = max_step(&s, &ds_a).min(max_step(&z, &dz_a)).min(1.0);
        let mu_a = (&s + &ds_a * alpha_a).dot(&(&z + &dz_a * alpha_a)) / m as f64;
        let ratio = mu_a / mu;
        let sigma = (ratio * ratio * ratio).clamp(0.0, 1.0);

        let r_c = r_c + ds_a.component_mul(&dz_a) - DVector::from_element(m, sigma * mu);
        let (dx, dy, ds, dz) = direction(&r_c);
        let alpha = (0.99 * max_step(&s, &ds).min(max_step(&z, &dz))).min(1.0);
        if !(alpha > 1e-14) {
            break;
        }
        x += &dx * alpha;
        y += &dy * alpha;
        s += &ds * alpha;
        z += &dz * alpha;
        if !(x.iter().chain(s.iter()).chain(z.iter()).chain(y.iter()).all(|v| v.is_finite())) {
            return Err(Error::NumericalBreakdown("interior point iterates became non-finite"));
        }
    }
    Ok(IpmResult { x, s, z, y, iterations, certificate: None })
}

/// Solves the KKT system of the constraints the interior point iterate marks
/// active (z > s), then corrects the guess: a negative multiplier leaves the
/// set, a violated row joins it.
fn polish(
    problem: &QpProblem,
    red: &Reduced,
    s: &DVector<f64>,
    z: &DVector<f64>,
) -> Option<(DVector<f64>, DVector<f64>, DVector<f64>)> {
    let m = red.g.nrows();
    let mut active: Vec<usize> = (0..m).filter(|&i| z[i] > s[i]).collect();
    let tol = 1e-12 * (1.0 + problem.q.amax());
    for _ in 0..(2 * m + 4) {
        let (x, zf, y) = solve_active(problem, red, &active)?;
        let worst_dual = active.iter().copied().min_by(|&a, &b| zf[a].total_cmp(&zf[b]));
        if let Some(i) = worst_dual.filter(|&i| zf[i] < -tol) {
            active.retain(|&j| j != i);
            continue;
        }
        let slack = &red.h - &red.g * &x;
        let worst_row = (0..m).filter(|i| !active.contains(i)).min_by(|&a, &b| slack[a].total_cmp(&slack[b]));
        if let Some(i) = worst_row.filter(|&i| slack[i] < -1e-12) {
            active.push(i);
            active.sort_unstable();
            continue;
        }
        return Some((x, zf, y));
    }
    None
}

fn solve_active(
    problem: &QpProblem,
    red: &Reduced,
    active: &[usize],
) -> Option<(DVector<f64>, DVector<f64>, DVector<f64>)> {
    let n = problem.n();
    let (pe, k) = (red.a.nrows(), active.len());
    let dim = n + pe + k;

    let mut kkt = DMatrix::zeros(dim, dim);
    kkt.view_mut((0, 0), (n, n)).copy_from(&problem.p);
    let mut rhs = DVector::zeros(dim);
    rhs.rows_mut(0, n).copy_from(&(-&problem.q));
    for r in 0..pe {
        for c in 0..n {
            kkt[(n + r, c)] = red.a[(r, c)];
            kkt[(c, n + r)] = red.a[(r, c)];
        }
        rhs[n + r] = red.b[r];
    }
    for (r, &i) in active.iter().enumerate() {
        for c in 0..n {
            kkt[(n + pe + r, c)] = red.g[(i, c)];
            kkt[(c, n + pe + r)] = red.g[(i, c)];
        }
        rhs[n + pe + r] = red.h[i];
    }
    let mut reg = kkt.clone();
    for i in 0..dim {
        reg[(i, i)] += if i < n { REG } else { -REG };
    }
    let lu = reg.lu();
    let mut sol = lu.solve(&rhs)?;
    for _ in 0..5 {
        let err = &rhs - &kkt * &sol;
        if err.amax() <= 1e-15 * (1.0 + rhs.amax()) {
            break;
        }
        sol += lu.solve(&err)?;
    }
    if !sol.iter().all(|v| v.is_finite()) {
        return None;
    }
    let x = sol.rows(0, n).into_owned();
    let y = sol.rows(n, pe).into_owned();
    let mut zf = DVector::zeros(red.g.nrows());
    for (r, &i) in active.iter().enumerate() {
        zf[i] = sol[n + pe + r];
    }
    Some((x, zf, y))
}

/// Minimizes the largest inequality violation t subject to the equalities;
/// a positive optimum proves infeasibility and its duals form the certificate.
fn phase_one_certificate(problem: &QpProblem) -> Result<Option<Certificate>, Error> {
    let (n, m, pe) = (problem.n(), problem.h.len(), problem.b.len());
    if m == 0 {
        return Ok(None);
    }
    let eps = 1e-8;
    let mut p = DMatrix::identity(n + 1, n + 1) * eps;
    p[(n, n)] = eps;
    let mut q = DVector::zeros(n + 1);
    q[n] = 1.0;
    let mut g = DMatrix::zeros(m + 1, n + 1);
    g.view_mut((0, 0), (m, n)).copy_from(&problem.g);
    for i in 0..m {
        g[(i, n)] = -1.0;
    }
    g[(m, n)] = -1.0;
    let mut h = DVector::zeros(m + 1);
    h.rows_mut(0, m).copy_from(&problem.h);
    let mut a = DMatrix::zeros(pe, n + 1);
    a.view_mut((0, 0), (pe, n)).copy_from(&problem.a);
    let aux = QpProblem { p, q, g, h, a, b: problem.b.clone() };
    let sol = solve_validated(&aux, false)?;
    if sol.status != QpStatus::Optimal {
        return Ok(None);
    }
    let t = sol.y[n];
    let z = sol.duals_ineq.rows(0, m).into_owned();
    let y = sol.duals_eq.clone();
    let gap = problem.h.dot(&z) + problem.b.dot(&y);
    if t > FEASIBILITY_TOL && gap < 0.0 {
        Ok(Some((z, y)))
    } else {
        Ok(None)
    }
}

/// Plain-text dump of a problem: one `name rows cols` header per matrix
/// followed by its rows, whitespace separated, in shortest round-trip decimal.
pub fn dump_problem(p: &QpProblem) -> String {
    let mut out = String::from("# qp problem: min 1/2 y'Py + q'y  s.t. Gy <= h, Ay = b\n");
    let mut put = |name: &str, rows: usize, cols: usize, at: &dyn Fn(usize, usize) -> f64| {
        let _ = writeln!(out, "{name} {rows} {cols}");
        for r in 0..rows {
            let line: Vec<String> = (0..cols).map(|c| alloc::format!("{:?}", at(r, c))).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    };
    put("P", p.p.nrows(), p.p.ncols(), &|r, c| p.p[(r, c)]);
    put("q", p.q.len(), 1, &|r, _| p.q[r]);
    put("G", p.g.nrows(), p.g.ncols(), &|r, c| p.g[(r, c)]);
    put("h", p.h.len(), 1, &|r, _| p.h[r]);
    put("A", p.a.nrows(), p.a.ncols(), &|r, c| p.a[(r, c)]);
    put("b", p.b.len(), 1, &|r, _| p.b[r]);
    out
}

/// Reads the format written by [`dump_problem`].
pub fn parse_problem(text: &str) -> Result<QpProblem, Error> {
    let bad = |msg: &str| Error::InvalidInput(alloc::format!("qp dump: {msg}"));
    let mut lines = text.lines().filter(|l| !l.trim_start().starts_with('#') && !l.trim().is_empty());
    let mut read = |name: &str| -> Result<DMatrix<f64>, Error> {
        let header = lines.next().ok_or_else(|| bad("unexpected end"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != name {
            return Err(bad(&alloc::format!("expected header for {name}")));
        }
        let rows: usize = parts[1].parse().map_err(|_| bad("row count"))?;
        let cols: usize = parts[2].parse().map_err(|_| bad("column count"))?;
        let mut m = DMatrix::zeros(rows, cols);
        for r in 0..rows {
            let line = lines.next().ok_or_else(|| bad("missing row"))?;
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad("number"))?;
            if vals.len() != cols {
                return Err(bad("row length"));
            }
            for (c, v) in vals.into_iter().enumerate() {
                m[(r, c)] = v;
            }
        }
        Ok(m)
    };
    let col = |m: DMatrix<f64>| DVector::from_column_slice(m.as_slice());
    let p = read("P")?;
    let q = col(read("q")?);
    let g = read("G")?;
    let h = col(read("h")?);
    let a = read("A")?;
    let b = col(read("b")?);
    QpProblem::new(p, q, g, h, a, b)
}
