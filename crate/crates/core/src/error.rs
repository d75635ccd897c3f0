use thiserror::Error;

/// Errors raised by the toolkit.
///
/// Every operation validates its inputs up front and reports the offending
/// quantity instead of silently producing a garbage number.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix entries length {len} does not match {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, len: usize },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension product overflows: {0} x {1}")]
    DimensionOverflow(usize, usize),

    #[error("matrix is not Hermitian: |X - X^†|_F = {asymmetry:e} exceeds {allowed:e}")]
    NotHermitian { asymmetry: f64, allowed: f64 },

    #[error("operator is not positive semidefinite: eigenvalue {eigenvalue:e} below -{threshold:e}")]
    NotPsd { eigenvalue: f64, threshold: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("invalid qubit subset: {0}")]
    InvalidSubset(String),

    #[error("qubit count {n} exceeds cap {cap}")]
    QubitCap { n: usize, cap: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown check id {0:?}")]
    UnknownCheck(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason: reason.into(),
    }
}
