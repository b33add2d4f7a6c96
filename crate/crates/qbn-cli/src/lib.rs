//! Library behind the `qbn` binary: scenario execution and the verification
//! suite. The binary is a thin argument parser over these functions, which
//! keeps every code path testable in-process.

pub mod scenario;
pub mod suite;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable, unparsable, or semantically invalid configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] qbn_core::Error),
}

impl CliError {
    /// Exit-code contract: 2 for schema/config violations (and i/o), 3 for
    /// capacity limits. Suite failures use exit 1, handled by the binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(qbn_core::Error::Capacity(_)) => 3,
            _ => 2,
        }
    }
}
