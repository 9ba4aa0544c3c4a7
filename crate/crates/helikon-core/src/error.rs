use alloc::string::String;
use alloc::vec::Vec;

/// One row of an outer scan: `(theta, b(theta), horizontal residual)`; `b` is NaN when the inner solve failed.
pub type ScanRow = (f64, f64, f64);

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("placement error: {0}")]
    Placement(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("degenerate periods: {0}")]
    DegeneratePeriod(String),
    #[error("quadrature did not converge (best estimate error {best_error:e})")]
    Accuracy { best_error: f64 },
    #[error("solve failure: {reason}")]
    SolveFailure { reason: String, scan: Vec<ScanRow> },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
