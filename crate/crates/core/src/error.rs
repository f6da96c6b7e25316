// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operand dimensions do not fit the operation.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// Inconsistent or unresolvable run configuration (grids, step sizes).
    #[error("configuration error: {0}")]
    Config(String),

    /// Numerical integration lost its invariants.
    #[error("integration failure at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    /// A matrix that must be a valid density matrix is not.
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
