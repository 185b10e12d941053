use std::fmt;

use thiserror::Error;

use crate::dsl::ParseError;

/// Which end of the real line a limit refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum XSide {
    #[serde(rename = "-inf")]
    MinusInf,
    #[serde(rename = "+inf")]
    PlusInf,
}

impl fmt::Display for XSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            XSide::MinusInf => f.write_str("x=-inf"),
            XSide::PlusInf => f.write_str("x=+inf"),
        }
    }
}

/// Errors raised by the symbol calculus, the construction and the discretization.
///
/// Numeric locations are reported as `f64` regardless of the scalar type in use.
#[derive(Debug, Error)]
pub enum Error {
    #[error("not of bounded variation at t={t}: tail contribution did not decrease over three domain doublings (last increment {last_increment:e})")]
    NotBoundedVariation { t: f64, last_increment: f64 },

    #[error("quadrature did not converge at t={t} after extending the domain to |x|={reach:e}")]
    QuadratureDiverged { t: f64, reach: f64 },

    #[error("no finite limit at {side} for t={t} (last Richardson gap {gap:e})")]
    NoFiniteLimit { t: f64, side: XSide, gap: f64 },

    #[error("not invertible in C_b: |a({t}, {x})| = {modulus:e} is below the floor {floor:e}")]
    NotInvertible { t: f64, x: f64, modulus: f64, floor: f64 },

    #[error("degenerate at {side}: |a(t, {side})| = {modulus:e} at t={t}")]
    DegenerateAtInfinity { t: f64, side: XSide, modulus: f64 },

    #[error("no bounded-away radius found at desk scale: best inf |a| on T_r was {best_inf:e} at r={best_r} (needed > {threshold:e})")]
    NoBoundedAwayRadius { best_inf: f64, best_r: f64, threshold: f64 },

    #[error("{0}; the symbol is not bounded away from zero, use the boundary route (fredholm_analyze) instead")]
    NotBoundedAway(Box<Error>),

    #[error("boundary values are not usable: {0}")]
    BoundaryNotVerified(String),

    #[error("iteration did not converge after {iterations} steps (last gap {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("symbol file: {0}")]
    SymbolFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of an iterative or limiting process rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotBoundedVariation { .. }
                | Error::QuadratureDiverged { .. }
                | Error::NoFiniteLimit { .. }
                | Error::NonConvergence { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
