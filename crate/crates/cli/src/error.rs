// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;

/// Failure of a subcommand, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration, schema violation or invalid argument.
    #[error("{0}")]
    Validation(String),
    /// Anything that went wrong after the inputs were accepted.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("{}: {err}", path.display()))
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl From<lpvar::Error> for CliError {
    fn from(e: lpvar::Error) -> Self {
        use lpvar::Error as E;
        match e {
            E::Io { .. } | E::ZeroScale(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
