//! Error classes shared across the crate.
//!
//! The classes map onto process exit codes in the CLI: configuration and
//! structural problems exit with 2, numerical failures and non-convergence
//! with 3.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameter values or inconsistent configuration supplied by
    /// the caller (bad config file, amplitude overflow, probability bound
    /// violations that are detectable before running).
    #[error("configuration error: {0}")]
    Config(String),

    /// Mismatched array shapes, misaligned grids or snapshot schedules:
    /// the inputs cannot describe the same problem.
    #[error("structural error: {0}")]
    Structural(String),

    /// A value outside the mathematical domain of an operation
    /// (negative density, non-positive saturation pressure).
    #[error("domain error: {0}")]
    Domain(String),

    /// The computation itself broke down (non-finite fields, step-count
    /// explosion, probability bound violated at run time).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An iterative solver failed to converge or could not bracket a root.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// Underlying I/O failure while reading or writing run artifacts.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A run directory or data file does not have the expected layout.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI uses for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Structural(_) | Error::Domain(_) | Error::Format(_) => 2,
            Error::Numerical(_) | Error::Convergence(_) => 3,
            Error::Io(_) => 3,
        }
    }
}
