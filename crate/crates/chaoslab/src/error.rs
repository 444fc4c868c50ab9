//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by kernel algebra, sampling and experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// Two operands live over different coordinate dimensions.
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    /// Two operands have incompatible tensor orders.
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    /// A dense path would exceed the supported size; nothing is computed.
    #[error("capacity exceeded: {what} = {requested}, cap is {cap}")]
    Capacity {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    /// Input violates a documented precondition.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A kernel/experiment file failed validation.
    #[error("kernel file: {0}")]
    KernelFile(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
