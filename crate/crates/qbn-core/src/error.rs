//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Mode count outside the supported range.
    #[error("mode count must be in 1..={max}, got {got}")]
    ModeCount { got: usize, max: usize },

    /// A mode index `k` with `k >= n`.
    #[error("mode {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },

    /// Operands live on different spaces or have inconsistent lengths.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A request that would exceed a hard size cap (2^n scaling).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Invalid numeric input (negative rate, probability outside (0,1), ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An internal self-check failed; indicates a bug, not bad input.
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}
