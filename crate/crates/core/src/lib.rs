// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Disorder-averaged quantum evolution.
//!
//! * [`qcore`]: dense complex linear algebra, states, random sampling.
//! * [`ensemble`]: Hamiltonian ensembles and exact averaging oracles.
//! * [`dressed`]: second-order master equations (Redfield, Lindblad, short-time).
//! * [`centralspin`]: closed forms for the isotropically disordered central spin.
//! * [`dirac`]: random-mass 1D Dirac model, analytic and split-step grid paths.

pub mod centralspin;
pub mod dirac;
pub mod dressed;
pub mod ensemble;
pub mod error;
pub mod qcore;

pub use error::{Error, Result};
pub use qcore::{
    bloch_map, density_from_bloch, gaussian, haar_unitary, mat_exp, purity, BlochVector,
    ComplexMatrix, DensityMatrix, RngStream, Units, C64,
};
pub use ensemble::{
    mc_average_evolution, CentralSpinEnsembleSpec, DeltaDistribution, EnsembleKind, Expectation,
    HamiltonianEnsemble, Reduction, Source, TrajectoryRecord,
};
pub use dressed::{build_lindblad, build_redfield, build_short_time, integrate, DressedGenerator, IntegratorSpec, KernelGrid};
pub use dirac::{
    disorder_kernels, evolve_characteristic, g_of_q, grid_ensemble, grid_evolve, mean_position, momentum_distribution,
    purity_plateau, sample_mass_field, CharGrid, CharacteristicSpinor, CorrelatorForm, CorrelatorSpec, DisorderKernels,
    GridEnsembleConfig, GridSpec, GridState, KernelMode,
};
