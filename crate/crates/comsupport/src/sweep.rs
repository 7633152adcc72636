//! Bisection over the pressing force for the static feasibility boundary.

use comsupport_core::centroidal::{solve_centroidal, ComPolicy};
use comsupport_core::controller::Scenario;
use comsupport_core::qp::QpStatus;
use comsupport_core::Error;
use serde::Serialize;

use crate::config::SCHEMA_VERSION;
use crate::{zero_push_com, Failure};

pub const RESOLUTION: f64 = 0.1;

/// Whether the static balance problem is solvable at pressing force `force`.
/// Any non-optimal outcome counts as infeasible.
pub fn feasible(sc: &Scenario, force: f64, policy: ComPolicy) -> Result<bool, Failure> {
    let setup = sc.static_setup(0.0, force, policy)?;
    match solve_centroidal(&setup) {
        Ok(r) => Ok(r.status == QpStatus::Optimal),
        Err(Error::BalanceInfeasible(_) | Error::NumericalBreakdown(_)) => Ok(false),
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Boundary {
    /// Largest force found feasible, `None` if `lo` already fails.
    pub max_feasible: Option<f64>,
    /// Smallest force found infeasible, `None` if `hi` still balances.
    pub min_infeasible: Option<f64>,
    pub solves: usize,
}

/// Bisects `[lo, hi]` down to [`RESOLUTION`], assuming feasibility is
/// monotone in the force.
pub fn bisect(sc: &Scenario, policy: ComPolicy, lo: f64, hi: f64) -> Result<Boundary, Failure> {
    check_range(lo, hi)?;
    let mut solves = 2;
    if !feasible(sc, lo, policy)? {
        return Ok(Boundary { max_feasible: None, min_infeasible: Some(lo), solves: 1 });
    }
    if feasible(sc, hi, policy)? {
        return Ok(Boundary { max_feasible: Some(hi), min_infeasible: None, solves });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > RESOLUTION {
        let mid = 0.5 * (a + b);
        solves += 1;
        if feasible(sc, mid, policy)? {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Boundary { max_feasible: Some(a), min_infeasible: Some(b), solves })
}

pub fn check_range(lo: f64, hi: f64) -> Result<(), Failure> {
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(Failure::Config { path: "--lo/--hi".into(), message: format!("need 0 ≤ lo < hi, got [{lo}, {hi}]") });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub parameter: &'static str,
    pub lo: f64,
    pub hi: f64,
    pub resolution: f64,
    pub free: Boundary,
    pub fixed: Boundary,
    /// CoM pin used for the fixed policy.
    pub fixed_point: [f64; 2],
    /// free / fixed boundary, when both are bracketed.
    pub ratio: Option<f64>,
}

/// Free and fixed boundaries, computed on two threads. The fixed pin is the
/// scenario's own point, or the zero-push CoM when the scenario is free.
pub fn sweep_hand_force(sc: &Scenario, lo: f64, hi: f64) -> Result<SweepReport, Failure> {
    check_range(lo, hi)?;
    let pin = match sc.com_policy {
        ComPolicy::Fixed(p) => p,
        ComPolicy::Free => zero_push_com(sc)?,
    };
    let (free, fixed) = std::thread::scope(|s| {
        let free = s.spawn(|| bisect(sc, ComPolicy::Free, lo, hi));
        let fixed = bisect(sc, ComPolicy::Fixed(pin), lo, hi);
        (free.join().expect("sweep thread panicked"), fixed)
    });
    let (free, fixed) = (free?, fixed?);
    let ratio = match (free.max_feasible, fixed.max_feasible) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    };
    Ok(SweepReport {
        schema_version: SCHEMA_VERSION,
        parameter: "hand_force",
        lo,
        hi,
        resolution: RESOLUTION,
        free,
        fixed,
        fixed_point: [pin.x, pin.y],
        ratio,
    })
}
