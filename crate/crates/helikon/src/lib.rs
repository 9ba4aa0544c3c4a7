//! Command-line front end for `helikon-core`: the `solve`, `sweep`, `mesh` and
//! `verify` commands, their file formats and the verification battery.

pub mod cli;
pub mod commands;
pub mod io;
pub mod parallel;
pub mod verify;

pub use helikon_core as core;

/// Failure of a command, mapped to the process exit code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    /// No root, unsolved data or a failed check.
    #[error("{0}")]
    Math(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Math(_) => 2,
        }
    }
}

impl From<helikon_core::Error> for CliError {
    fn from(e: helikon_core::Error) -> Self {
        use helikon_core::Error as E;
        match e {
            E::Domain(_) | E::Placement(_) => CliError::Config(e.to_string()),
            _ => CliError::Math(e.to_string()),
        }
    }
}
