use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("kernel is not ergodic: {0}")]
    NotErgodic(String),

    #[error("enumeration too large: {0}")]
    EnumerationGuard(String),

    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("spec file: {0}")]
    SpecFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
