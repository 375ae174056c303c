use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const USAGE: i32 = 2;
    pub const TOLERANCE: i32 = 3;
    pub const SOLVER: i32 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {}: {source}", path.display())]
    Write { path: PathBuf, source: std::io::Error },

    #[error("invalid config {}: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("invalid data in {}: {message}", path.display())]
    Data { path: PathBuf, message: String },

    #[error("tolerance violated: {0}")]
    Tolerance(String),

    #[error("solver failure: {0}")]
    Solver(#[from] kinwave::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Tolerance(_) => exit::TOLERANCE,
            CliError::Solver(_) => exit::SOLVER,
            _ => exit::USAGE,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
