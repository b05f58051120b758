use alloc::string::String;

use crate::modal::CompatibilityReport;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `|1 - cλ²|` fell under the degeneracy gate; the mode is first order.
    #[error("degenerate mode: leading coefficient {leading:e} is within the degeneracy gate")]
    DegenerateMode { leading: f64 },

    /// A degenerate mode whose initial data violates `β/α = -(b/a)λ²`.
    #[error("mode {mode:?} has no solution: required θ'/θ ratio {}, got {:?}", report.required_ratio, report.actual_ratio)]
    UnsolvableMode {
        mode: Option<usize>,
        report: CompatibilityReport,
    },

    /// The parameter coincides with a member of an exceptional set.
    #[error("exceptional parameter {value}: distance {distance:e} to exceptional value {nearest}")]
    ExceptionalParameter {
        value: f64,
        nearest: f64,
        distance: f64,
    },

    #[error("singular parameter: 1 - cλ² vanishes at λ = {lambda}")]
    SingularParameter { lambda: f64 },

    /// The implicit finite-difference system is singular (discrete analogue of
    /// an exceptional `c`). `row` is the vanishing discrete mode, or the pivot
    /// row when found during factorization.
    #[error("discrete exceptional parameter: singular system at row {row}")]
    DiscreteExceptional { row: usize },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),
}

macro_rules! invalid {
    ($($arg:tt)*) => {
        $crate::error::Error::InvalidArgument(alloc::format!($($arg)*))
    };
}
pub(crate) use invalid;
