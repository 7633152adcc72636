//! Scenario files, traces, plots and the command-line front end for
//! `comsupport-core`.
//!
//! Every output (CSV trace, JSON summary, solve/CSA reports) carries
//! [`config::SCHEMA_VERSION`].

pub mod cli;
pub mod config;
pub mod plot;
pub mod sweep;
pub mod trace;

use comsupport_core::centroidal::{solve_centroidal, ComPolicy};
use comsupport_core::controller::Scenario;
use comsupport_core::csa::Point2;
use comsupport_core::Error;

pub use config::ScenarioConfig;

/// Command failure, mapped one-to-one onto process exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("io error: {0}")]
    Io(String),
    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config { .. } => 2,
            Failure::Infeasible(_) => 3,
            Failure::Numerical(_) => 4,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BalanceInfeasible(_) => Failure::Infeasible(e.to_string()),
            Error::NumericalBreakdown(_) => Failure::Numerical(e.to_string()),
            Error::InvalidInput(_) | Error::NonCoplanarFeet { .. } | Error::LayoutMismatch { .. } => {
                Failure::Config { path: "<scenario>".into(), message: e.to_string() }
            }
            Error::DegenerateScale(_) | Error::DegenerateHull => {
                Failure::Config { path: "<scenario>".into(), message: e.to_string() }
            }
            Error::VerticalBalanceViolation { .. } | Error::DimensionMismatch(_) => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// CoM of the zero-push static solution: where the robot stands before the
/// hand presses. Used as the pin for a fixed CoM policy without an explicit
/// point.
pub fn zero_push_com(sc: &Scenario) -> Result<Point2, Failure> {
    let setup = sc.static_setup(0.0, 0.0, ComPolicy::Free)?;
    let r = solve_centroidal(&setup)?;
    Ok(Point2::new(r.y.com.x, r.y.com.y))
}

/// Scenario with the CoM policy fully resolved.
pub fn load_scenario(cfg: &ScenarioConfig) -> Result<Scenario, Failure> {
    let mut sc = cfg.to_scenario()?;
    if cfg.com_policy == config::ComPolicyConfig::Fixed && cfg.com_fixed_point.is_none() {
        sc.com_policy = ComPolicy::Fixed(zero_push_com(&sc)?);
    }
    Ok(sc)
}
