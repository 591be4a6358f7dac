//! Library side of the batch front-end: file schemas, command
//! implementations, CSV emission, and scenario dispatch. The `liplab` binary
//! is a thin argument parser over these.

#![allow(clippy::result_large_err)]

pub mod csv;
pub mod files;
pub mod run;
pub mod scenario;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Parse(String),
    #[error("guard violation: {0}")]
    Guard(String),
    #[error("falsified: {0}")]
    Falsified(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Guard(_) => 3,
            CliError::Falsified(_) => 4,
        }
    }
}
