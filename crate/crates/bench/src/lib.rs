//! Library side of the `gnncolor` command-line tool: run records,
//! performance profiles and the timed coloring driver.

pub mod profile;
pub mod records;
pub mod run;

use std::fmt;

/// Failure classes, mapped to process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable or malformed input. Exit code 1.
    Invalid(String),
    /// A produced coloring failed validation or runs disagreed. Exit code 2.
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Validation(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(msg) => write!(f, "error: {msg}"),
            CliError::Validation(msg) => write!(f, "validation failed: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gnncolor::Error> for CliError {
    fn from(e: gnncolor::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}
