// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Density matrices, Bloch vectors and purity.

use super::linalg::{
    c, hermitian_part, hermiticity_defect, identity, min_eigenvalue, real, sigma_x, sigma_y,
    sigma_z, trace, ComplexMatrix, C64,
};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const EIGEN_TOL: f64 = 1e-10;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite
/// (all to double-precision tolerances).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidState("matrix must be square and non-empty".into()));
        }
        let herm = hermiticity_defect(&m);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = trace(&m);
        if (tr - real(1.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let lmin = min_eigenvalue(&m);
        if lmin < -EIGEN_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lmin:e}")));
        }
        Ok(Self(m))
    }

    /// Wrap without validation; for integrator outputs that are checked separately.
    pub fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalised) state vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Domain("pure state vector has zero or non-finite norm".into()));
        }
        let d = psi.len();
        let m = ComplexMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Ok(Self(hermitian_part(&m)))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(identity(d) / real(d as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn purity(&self) -> f64 {
        purity_of(&self.0)
    }
}

/// Qubit Bloch vector, ρ = (𝟙 + a·σ)/2.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// a_i = Tr[ρσ_i] for any 2×2 matrix.
pub fn bloch_of(m: &ComplexMatrix) -> Result<BlochVector> {
    if m.nrows() != 2 || m.ncols() != 2 {
        return Err(Error::Dimension { expected: 2, got: m.nrows() });
    }
    let comp = |s: ComplexMatrix| trace(&(m * s)).re;
    Ok(BlochVector::new(comp(sigma_x()), comp(sigma_y()), comp(sigma_z())))
}

pub fn bloch_map(rho: &DensityMatrix) -> Result<BlochVector> {
    bloch_of(rho.matrix())
}

pub fn density_from_bloch(a: BlochVector) -> Result<DensityMatrix> {
    if a.norm() > 1.0 + 1e-10 {
        return Err(Error::InvalidState(format!("Bloch vector outside unit ball (|a| = {})", a.norm())));
    }
    let m = (identity(2) + sigma_x() * real(a.x) + sigma_y() * real(a.y) + sigma_z() * real(a.z))
        * real(0.5);
    Ok(DensityMatrix(m))
}

/// Tr[ρ²] for a Hermitian matrix.
pub fn purity_of(m: &ComplexMatrix) -> f64 {
    // Tr[ρ²] = Σ_ij |ρ_ij|² when ρ = ρ†
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

/// Normalised qubit state from (↑, ↓) amplitudes.
pub fn qubit_state(up: C64, down: C64) -> Result<DensityMatrix> {
    DensityMatrix::pure(&[up, down])
}

pub fn spin_down() -> DensityMatrix {
    DensityMatrix::pure(&[c(0.0, 0.0), c(1.0, 0.0)]).expect("unit vector")
}

pub fn spin_up() -> DensityMatrix {
    DensityMatrix::pure(&[c(1.0, 0.0), c(0.0, 0.0)]).expect("unit vector")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::max_abs_diff;
    use crate::qcore::rng::{haar_unitary, RngStream};
    use proptest::prelude::*;

    #[test]
    fn bloch_of_basis_states() {
        assert_eq!(bloch_map(&spin_down()).unwrap(), BlochVector::new(0.0, 0.0, -1.0));
        let mixed = DensityMatrix::maximally_mixed(2);
        assert_eq!(bloch_map(&mixed).unwrap(), BlochVector::new(0.0, 0.0, 0.0));
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = qubit_state(c(s, 0.0), c(s, 0.0)).unwrap();
        let a = bloch_map(&plus).unwrap();
        assert!((a.x - 1.0).abs() < 1e-15 && a.y.abs() < 1e-15 && a.z.abs() < 1e-15);
    }

    #[test]
    fn bloch_requires_qubit() {
        let r = DensityMatrix::maximally_mixed(3);
        assert!(matches!(bloch_map(&r), Err(Error::Dimension { .. })));
    }

    #[test]
    fn purity_values() {
        assert!((purity(&spin_up()) - 1.0).abs() < 1e-15);
        assert!((purity(&DensityMatrix::maximally_mixed(2)) - 0.5).abs() < 1e-15);
        let diag = DensityMatrix::new(ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(0.75, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.25, 0.0)],
        ))
        .unwrap();
        assert!((purity(&diag) - 5.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let not_unit = identity(2);
        assert!(DensityMatrix::new(not_unit).is_err());
        let negative = ComplexMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(negative).is_err());
        let skew = ComplexMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(DensityMatrix::new(skew).is_err());
    }

    proptest! {
        #[test]
        fn bloch_roundtrip(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            let n = (x * x + y * y + z * z).sqrt();
            let a = if n > 1.0 { BlochVector::new(x / n, y / n, z / n) } else { BlochVector::new(x, y, z) };
            let back = bloch_map(&density_from_bloch(a).unwrap()).unwrap();
            prop_assert!((back.x - a.x).abs() < 1e-12);
            prop_assert!((back.y - a.y).abs() < 1e-12);
            prop_assert!((back.z - a.z).abs() < 1e-12);
        }

        #[test]
        fn purity_is_unitarily_invariant(seed in 0u64..10_000, p in 0.0f64..1.0) {
            let mut rng = RngStream::new(seed, 0);
            let psi = [rng.complex_normal(), rng.complex_normal(), rng.complex_normal()];
            let pure = DensityMatrix::pure(&psi).unwrap().into_matrix();
            let rho = pure * real(p) + identity(3) * real((1.0 - p) / 3.0);
            let u = haar_unitary(3, &mut rng).unwrap();
            let rotated = &u * &rho * u.adjoint();
            prop_assert!((purity_of(&rho) - purity_of(&rotated)).abs() < 1e-12);
            prop_assert!(max_abs_diff(&rho, &rho.adjoint()) < 1e-15);
        }
    }
}
