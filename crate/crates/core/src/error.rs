use thiserror::Error;

/// Errors raised by grid construction, operators and the verification harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a mathematical precondition (negative or
    /// non-finite values, mismatched shapes, out-of-bounds rectangles).
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter or configuration value is outside its admissible range.
    #[error("configuration error: {0}")]
    Config(String),

    /// The brute-force oracle refused a request whose rectangle family is too large.
    #[error("brute-force guard exceeded: {count} rectangles > limit {limit}")]
    GuardExceeded { count: u128, limit: u128 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
