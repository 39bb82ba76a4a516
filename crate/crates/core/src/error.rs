use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised across the crate.
///
/// Every variant maps to a short machine-readable [`ErrorKind`] so that
/// per-interval or per-replicate failures can be carried in output tables.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("model {0} has no closed-form size function")]
    UnsupportedClosedForm(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical blow-up at t = {t}: state {state}")]
    NumericalBlowup { t: f64, state: f64 },
    #[error("integration did not converge after {substeps} substeps per interval")]
    IntegrationNotConverged { substeps: usize },
    #[error("non-positive logarithm argument {0}")]
    NonPositiveLogArgument(f64),
    #[error("degenerate denominator: {0}")]
    DegenerateDenominator(&'static str),
    #[error("fractional power of non-positive base {0}")]
    NonPositiveBase(f64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("singular Jacobian")]
    SingularJacobian,
    #[error("no convergence after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("window {window} invalid for series of length {len}")]
    WindowTooLarge { window: usize, len: usize },
    #[error("non-positive value {value} at index {index}")]
    NonPositiveValue { index: usize, value: f64 },
    #[error("every interval of the profile failed")]
    EmptyProfile,
    #[error("non-uniform time grid: {0}")]
    NonUniformGrid(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    UnsupportedClosedForm,
    Domain,
    NumericalBlowup,
    IntegrationNotConverged,
    NonPositiveLogArgument,
    DegenerateDenominator,
    NonPositiveBase,
    DimensionMismatch,
    SingularJacobian,
    NoConvergence,
    WindowTooLarge,
    NonPositiveValue,
    EmptyProfile,
    NonUniformGrid,
    InvalidInput,
}

impl ErrorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorKind::UnsupportedClosedForm => "unsupported_closed_form",
            ErrorKind::Domain => "domain",
            ErrorKind::NumericalBlowup => "numerical_blowup",
            ErrorKind::IntegrationNotConverged => "integration_not_converged",
            ErrorKind::NonPositiveLogArgument => "non_positive_log_argument",
            ErrorKind::DegenerateDenominator => "degenerate_denominator",
            ErrorKind::NonPositiveBase => "non_positive_base",
            ErrorKind::DimensionMismatch => "dimension_mismatch",
            ErrorKind::SingularJacobian => "singular_jacobian",
            ErrorKind::NoConvergence => "no_convergence",
            ErrorKind::WindowTooLarge => "window_too_large",
            ErrorKind::NonPositiveValue => "non_positive_value",
            ErrorKind::EmptyProfile => "empty_profile",
            ErrorKind::NonUniformGrid => "non_uniform_grid",
            ErrorKind::InvalidInput => "invalid_input",
        }
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::UnsupportedClosedForm(_) => ErrorKind::UnsupportedClosedForm,
            Error::Domain(_) => ErrorKind::Domain,
            Error::NumericalBlowup { .. } => ErrorKind::NumericalBlowup,
            Error::IntegrationNotConverged { .. } => ErrorKind::IntegrationNotConverged,
            Error::NonPositiveLogArgument(_) => ErrorKind::NonPositiveLogArgument,
            Error::DegenerateDenominator(_) => ErrorKind::DegenerateDenominator,
            Error::NonPositiveBase(_) => ErrorKind::NonPositiveBase,
            Error::DimensionMismatch { .. } => ErrorKind::DimensionMismatch,
            Error::SingularJacobian => ErrorKind::SingularJacobian,
            Error::NoConvergence { .. } => ErrorKind::NoConvergence,
            Error::WindowTooLarge { .. } => ErrorKind::WindowTooLarge,
            Error::NonPositiveValue { .. } => ErrorKind::NonPositiveValue,
            Error::EmptyProfile => ErrorKind::EmptyProfile,
            Error::NonUniformGrid(_) => ErrorKind::NonUniformGrid,
            Error::InvalidInput(_) => ErrorKind::InvalidInput,
        }
    }

    /// True for failures caused by the numbers rather than by the caller.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidInput(_) | Error::DimensionMismatch { .. } | Error::NonUniformGrid(_)
        )
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub type Result<T> = std::result::Result<T, Error>;
