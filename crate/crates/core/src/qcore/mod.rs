// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra, qubit conveniences and random sampling.

pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod state;

pub use linalg::{mat_exp, ComplexMatrix, C64};
pub use rng::{gaussian, haar_unitary, RngStream};
pub use state::{bloch_map, density_from_bloch, purity, BlochVector, DensityMatrix};

/// Physical constants shared by a run. ħ defaults to 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Units {
    pub hbar: f64,
}

impl Default for Units {
    fn default() -> Self {
        Self { hbar: 1.0 }
    }
}
