use alloc::string::String;
use core::fmt;

/// Errors raised by the balance library.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Σ f_z does not equal m·g within tolerance.
    VerticalBalanceViolation { total_fz: f64, weight: f64 },
    /// The hand carries (almost) the whole weight, S_c ≤ 1e-9.
    DegenerateScale(f64),
    /// A foot sole is not at ground height.
    NonCoplanarFeet { index: usize, z: f64 },
    /// Fewer than three non-collinear points.
    DegenerateHull,
    /// A contact block does not sit at its decision-vector offset.
    LayoutMismatch { contact: usize, expected: usize, found: usize },
    DimensionMismatch(&'static str),
    /// Factorization failed even after regularization.
    NumericalBreakdown(&'static str),
    /// The centroidal QP has no solution: the configuration cannot be balanced.
    BalanceInfeasible(String),
    /// A value violates a documented precondition.
    InvalidInput(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::VerticalBalanceViolation { total_fz, weight } => write!(
                f,
                "vertical force balance violated: sum f_z = {total_fz} N, weight = {weight} N"
            ),
            Error::DegenerateScale(s) => {
                write!(f, "degenerate CSA scale S_c = {s}: hand carries the full weight")
            }
            Error::NonCoplanarFeet { index, z } => {
                write!(f, "foot {index} is not on the ground plane (z = {z})")
            }
            Error::DegenerateHull => write!(f, "fewer than three non-collinear points"),
            Error::LayoutMismatch { contact, expected, found } => write!(
                f,
                "contact {contact} placed at column {found}, layout expects {expected}"
            ),
            Error::DimensionMismatch(what) => write!(f, "dimension mismatch: {what}"),
            Error::NumericalBreakdown(what) => write!(f, "numerical breakdown: {what}"),
            Error::BalanceInfeasible(why) => write!(f, "balance infeasible: {why}"),
            Error::InvalidInput(why) => write!(f, "invalid input: {why}"),
        }
    }
}

impl core::error::Error for Error {}
