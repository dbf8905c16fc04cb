//! Error type carrying the process exit code contract: 2 for bad input of
//! any kind, 3 for structurally incompatible sketches.

use std::fmt;

/// Exit code for malformed input, infeasible specs, and IO failures.
pub const EXIT_BAD_INPUT: i32 = 2;
/// Exit code for sketches that cannot be compared with each other.
pub const EXIT_INCOMPATIBLE: i32 = 3;

/// A user-facing failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

impl CliError {
    pub fn bad_input(message: impl Into<String>) -> Self {
        Self { message: message.into(), code: EXIT_BAD_INPUT }
    }

    pub fn incompatible(message: impl Into<String>) -> Self {
        Self { message: message.into(), code: EXIT_INCOMPATIBLE }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<bbmh_core::Error> for CliError {
    fn from(err: bbmh_core::Error) -> Self {
        match err {
            bbmh_core::Error::Incompatible(_) => Self::incompatible(err.to_string()),
            _ => Self::bad_input(err.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self::bad_input(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
