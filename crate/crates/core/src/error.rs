use alloc::string::String;

/// Errors raised by the numerical routines.
///
/// Conditions the caller asked to *check* (a tail inequality failing, a
/// non-integrable tail) are reported inside the result records instead.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("negative value {value} at atom {index}")]
    NegativeValue { index: usize, value: f64 },
    #[error("non-finite value while evaluating {what} at sample {index}")]
    Overflow { what: &'static str, index: usize },
    #[error("measure is not a product of its marginals")]
    NotProduct,
    #[error("{what} exceeds the cap of {limit}")]
    SizeCap { what: &'static str, limit: u64 },
    #[error("norm for index subset {0:#b} was not supplied")]
    MissingSubset(u32),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
