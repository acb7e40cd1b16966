//! Error type shared by all simulator modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// A configuration value is out of range or inconsistent with others.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An input slice has the wrong length or an argument is out of domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A measurement could not be produced from the given signal.
    #[error("estimation failed: {0}")]
    EstimationFailed(String),

    /// A search terminated without any feasible point.
    #[error("no feasible solution: {0}")]
    Infeasible(String),

    /// Numerical breakdown (non-finite values, singular system).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
