//! Experiment runner behind the `snnfit` binary: config handling, run
//! directories and the `simulate`, `optimize` and `front` commands.

pub mod config;
pub mod manifest;
pub mod run;

use thiserror::Error;

/// Failure classes, each mapped to a stable process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("{0}")]
    Partial(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Partial(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<snnfit_core::SnnError> for CliError {
    fn from(e: snnfit_core::SnnError) -> Self {
        use snnfit_core::SnnError as E;
        match e {
            E::Diverged { .. } => CliError::Numerical(e.to_string()),
            E::Config(_) | E::Domain(_) => CliError::Config(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}
