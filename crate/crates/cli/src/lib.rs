//! Batch front end: skeleton precomputation, trial runs, method comparisons
//! and SVG reports.

pub mod commands;
pub mod experiment;
pub mod plot;
pub mod summary;
pub mod table;

use rdw_core::Error;

/// Exit status for a successful invocation.
pub const EXIT_OK: i32 = 0;
/// Exit status when something failed while running.
pub const EXIT_RUNTIME: i32 = 1;
/// Exit status for bad arguments, configs or geometry.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidGeometry(_)
            | Error::PoseOutsideFreeSpace { .. }
            | Error::EmptyFreeSpace
            | Error::InvalidArgument(_)
            | Error::Config(_)
            | Error::Io(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
