// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the benchmarks in `benches/`.

use ddqe_core::centralspin::{CentralSpinParams, Fig2Case};
use ddqe_core::dirac::{CharGrid, CharacteristicSpinor, CorrelatorSpec, GridSpec, GridState};
use ddqe_core::{DeltaDistribution, DensityMatrix, HamiltonianEnsemble, RngStream};

/// Central-spin ensemble at √Δ̄² = 0.1ħω with the case (ii) initial state.
pub fn central_spin() -> (HamiltonianEnsemble, DensityMatrix) {
    let p = CentralSpinParams::new(1.0, 0.01);
    (p.ensemble(DeltaDistribution::Fixed).expect("valid parameters"), Fig2Case::II.initial_state())
}

/// Weak Gaussian disorder with ℓ = 1.
pub fn correlator() -> CorrelatorSpec {
    CorrelatorSpec::gaussian(0.001, 1.0)
}

/// Right-moving packet p₀ = 1, σ = 8 on an n × n characteristic grid.
pub fn spinor(n: usize) -> CharacteristicSpinor {
    let grid = CharGrid { n_s: n, s_max: 128.0, n_q: n, q_max: 1.0 };
    CharacteristicSpinor::gaussian_right_mover(1.0, 8.0, 1.0, grid).expect("valid grid")
}

/// Packet on an N = 4096, L = 512 grid carrying one sampled mass field.
pub fn grid_state(seed: u64) -> GridState {
    let grid = GridSpec::new(4096, 512.0);
    let mass = ddqe_core::dirac::sample_mass_field(&correlator(), &grid, &mut RngStream::new(seed, 0)).expect("valid field");
    GridState::gaussian(grid, 0.0, 8.0, 1.0).and_then(|s| s.with_mass(mass)).expect("valid state")
}
