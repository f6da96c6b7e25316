// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical validity breach: {0}")]
    Validity(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    /// Process exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Validity(_) => 2,
            CliError::Internal(_) | CliError::Io { .. } => 3,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }
}

impl From<ddqe_core::Error> for CliError {
    fn from(e: ddqe_core::Error) -> Self {
        use ddqe_core::Error as E;
        match e {
            E::Config(_) | E::Domain(_) | E::Dimension { .. } => CliError::Config(e.to_string()),
            E::Integration { .. } => CliError::Validity(e.to_string()),
            E::InvalidState(_) => CliError::Internal(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
