use thiserror::Error;

use crate::numerics::NumericsError;

/// Errors raised by the geometry, profile and variational layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] NumericsError),

    #[error("{what} = {value} is outside the admissible domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("profile is required to be nonincreasing")]
    NotNonincreasing,

    #[error("super-level set at level {level} has infinite measure")]
    InfiniteMeasure { level: f64 },

    #[error("integral diverges on segment [{lo}, {hi})")]
    Divergent { lo: f64, hi: f64 },

    #[error("non-integrable singularity at s = 0")]
    NonIntegrableAtZero,

    #[error("grid [{s_min}, {s_max}] does not cover breakpoint {breakpoint}")]
    GridDoesNotCover { s_min: f64, s_max: f64, breakpoint: f64 },

    #[error("grid too coarse: estimated relative discretization error {estimate:.3e}, try {suggested_points} points")]
    GridTooCoarse { estimate: f64, suggested_points: usize },

    #[error("ln(R/s0) = {log_ratio} exceeds the grid feasibility cap {cap}")]
    InfeasibleGrid { log_ratio: f64, cap: f64 },

    #[error("no probe volume satisfies A(s) <= (1+eps)(n-1)s for eps = {eps}")]
    NoThreshold { eps: f64 },

    #[error("zero denominator: {0}")]
    ZeroDenominator(&'static str),

    #[error("insufficient smoothness: {0}")]
    InsufficientSmoothness(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        what,
        value,
        expected,
    }
}
