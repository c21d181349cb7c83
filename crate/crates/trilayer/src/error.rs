use std::path::PathBuf;

use thiserror::Error;
use trilayer_core::error::{ConfigError, SolveError};

/// Validation failures, including unreadable or malformed inputs.
pub const EXIT_INVALID: i32 = 2;
/// Numerical solver failures.
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("malformed configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Invalid(#[from] ConfigError),
    #[error("{name}: {0}", name = .0.name())]
    Solve(#[from] SolveError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solve(_) => EXIT_SOLVER,
            _ => EXIT_INVALID,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
