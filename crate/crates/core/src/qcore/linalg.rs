// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Small dense complex linear algebra.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`; for qubits index 0 is |↑⟩ and
//! index 1 is |↓⟩, so σ_z = diag(1, −1) and σ_+ = |↑⟩⟨↓|.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn zeros(d: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(d, d)
}

fn qubit(entries: [C64; 4]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &entries)
}

pub fn sigma_x() -> ComplexMatrix {
    qubit([ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> ComplexMatrix {
    qubit([ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> ComplexMatrix {
    qubit([ONE, ZERO, ZERO, -ONE])
}

/// σ_+ = |↑⟩⟨↓|
pub fn sigma_plus() -> ComplexMatrix {
    qubit([ZERO, ONE, ZERO, ZERO])
}

/// σ_- = |↓⟩⟨↑|
pub fn sigma_minus() -> ComplexMatrix {
    qubit([ZERO, ZERO, ONE, ZERO])
}

pub fn proj_up() -> ComplexMatrix {
    qubit([ONE, ZERO, ZERO, ZERO])
}

pub fn proj_down() -> ComplexMatrix {
    qubit([ZERO, ZERO, ZERO, ONE])
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

/// Lindblad dissipator 𝓛(L, ρ) = LρL† − ½{L†L, ρ}.
pub fn lindblad_term(l: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let l_dag = l.adjoint();
    let ldl = &l_dag * l;
    l * rho * &l_dag - (&ldl * rho + rho * &ldl) * real(0.5)
}

pub fn trace(a: &ComplexMatrix) -> C64 {
    a.trace()
}

/// Largest entry modulus.
pub fn max_abs(a: &ComplexMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
}

/// Max-entry deviation from Hermiticity.
pub fn hermiticity_defect(a: &ComplexMatrix) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

pub fn is_hermitian(a: &ComplexMatrix, tol: f64) -> bool {
    a.is_square() && hermiticity_defect(a) <= tol
}

/// (A + A†)/2
pub fn hermitian_part(a: &ComplexMatrix) -> ComplexMatrix {
    (a + a.adjoint()) * real(0.5)
}

pub fn is_finite(a: &ComplexMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Eigen-decomposition of a Hermitian matrix: (ascending eigenvalues, eigenvectors as columns).
pub fn hermitian_eigen(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let eig = hermitian_part(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(a.nrows(), a.ncols(), |r, col| {
        eig.eigenvectors[(r, order[col])]
    });
    (values, vectors)
}

pub fn min_eigenvalue(a: &ComplexMatrix) -> f64 {
    hermitian_eigen(a).0[0]
}

/// Coefficients (a₀, b) of a 2×2 matrix A = a₀𝟙 + b·σ.
pub fn pauli_decompose(a: &ComplexMatrix) -> (C64, [C64; 3]) {
    let (m00, m01, m10, m11) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let a0 = (m00 + m11) * 0.5;
    let bx = (m01 + m10) * 0.5;
    let by = (m10 - m01) * 0.5 * (-I);
    let bz = (m00 - m11) * 0.5;
    (a0, [bx, by, bz])
}

pub fn pauli_compose(a0: C64, b: [C64; 3]) -> ComplexMatrix {
    qubit([a0 + b[2], b[0] - I * b[1], b[0] + I * b[1], a0 - b[2]])
}

/// exp(a₀𝟙 + b·σ) for complex coefficients, in closed form:
/// e^{a₀}[cosh(w)𝟙 + sinh(w)/w · b·σ] with w² = b·b.
pub fn pauli_exp(a0: C64, b: [C64; 3]) -> [C64; 4] {
    let w2 = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    let (ch, shc) = if w2.norm() < 1e-6 {
        // even series in w; the next omitted terms are O(|w|^8)
        let w4 = w2 * w2;
        (
            ONE + w2 / 2.0 + w4 / 24.0 + w4 * w2 / 720.0,
            ONE + w2 / 6.0 + w4 / 120.0 + w4 * w2 / 5040.0,
        )
    } else {
        let w = w2.sqrt();
        (w.cosh(), w.sinh() / w)
    };
    let pre = a0.exp();
    let (bx, by, bz) = (b[0] * shc, b[1] * shc, b[2] * shc);
    [
        pre * (ch + bz),
        pre * (bx - I * by),
        pre * (bx + I * by),
        pre * (ch - bz),
    ]
}

/// Matrix exponential exp(scale·A).
///
/// 2×2 inputs use the closed Pauli form, Hermitian inputs the spectral
/// decomposition, everything else Padé scaling-and-squaring.
pub fn mat_exp(a: &ComplexMatrix, scale: C64) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension { expected: a.nrows(), got: a.ncols() });
    }
    if !is_finite(a) || !(scale.re.is_finite() && scale.im.is_finite()) {
        return Err(Error::Domain("mat_exp: non-finite input".into()));
    }
    let d = a.nrows();
    if d == 1 {
        return Ok(ComplexMatrix::from_element(1, 1, (a[(0, 0)] * scale).exp()));
    }
    if d == 2 {
        let (a0, b) = pauli_decompose(a);
        let e = pauli_exp(a0 * scale, [b[0] * scale, b[1] * scale, b[2] * scale]);
        return Ok(ComplexMatrix::from_row_slice(2, 2, &e));
    }
    let norm = max_abs(a).max(f64::MIN_POSITIVE);
    if hermiticity_defect(a) <= 1e-14 * norm {
        let (vals, vecs) = hermitian_eigen(a);
        let diag = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d,
            vals.iter().map(|&l| (scale * l).exp()),
        ));
        return Ok(&vecs * diag * vecs.adjoint());
    }
    Ok((a * scale).exp())
}

/// Column-major vectorisation index of entry (i, j) in a d×d matrix.
#[inline]
pub fn vec_index(d: usize, i: usize, j: usize) -> usize {
    i + j * d
}

/// Matrix of a linear map on d×d matrices, acting on column-major vec(ρ).
pub fn superop_from_fn<F>(d: usize, f: F) -> ComplexMatrix
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix,
{
    let n = d * d;
    let mut s = ComplexMatrix::zeros(n, n);
    let mut basis = zeros(d);
    for j in 0..d {
        for i in 0..d {
            basis[(i, j)] = ONE;
            let img = f(&basis);
            basis[(i, j)] = ZERO;
            let col = vec_index(d, i, j);
            for jj in 0..d {
                for ii in 0..d {
                    s[(vec_index(d, ii, jj), col)] = img[(ii, jj)];
                }
            }
        }
    }
    s
}

/// Apply a superoperator matrix to ρ.
pub fn apply_superop(s: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let d = rho.nrows();
    let v = nalgebra::DVector::from_column_slice(rho.as_slice());
    let out = s * v;
    ComplexMatrix::from_column_slice(d, d, out.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(d: usize, seed: u64) -> ComplexMatrix {
        // cheap deterministic filler, independent of the rng module
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = ComplexMatrix::from_fn(d, d, |_, _| c(next(), next()));
        hermitian_part(&m)
    }

    /// Truncated Taylor series with scaling and squaring, used as an oracle.
    fn taylor_exp(a: &ComplexMatrix, scale: C64) -> ComplexMatrix {
        let d = a.nrows();
        let s = 10;
        let x = a * (scale / f64::from(1 << s));
        let mut term = identity(d);
        let mut acc = identity(d);
        for k in 1..30 {
            term = &term * &x / real(k as f64);
            acc += &term;
        }
        for _ in 0..s {
            acc = &acc * &acc;
        }
        acc
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = mat_exp(&sigma_z(), real(0.0)).unwrap();
        assert!(max_abs_diff(&e, &identity(2)) == 0.0);
    }

    #[test]
    fn pauli_rotation_closed_form() {
        let e = mat_exp(&sigma_z(), c(0.0, -std::f64::consts::FRAC_PI_2)).unwrap();
        assert!(max_abs_diff(&e, &(sigma_z() * (-I))) < 1e-15);
    }

    #[test]
    fn hermitian_exp_matches_series_oracle() {
        for seed in 0..5 {
            let h = random_hermitian(4, seed);
            let t = 1.7;
            let e = mat_exp(&h, c(0.0, -t)).unwrap();
            let oracle = taylor_exp(&h, c(0.0, -t));
            assert!(max_abs_diff(&e, &oracle) < 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn general_and_two_by_two_paths_match_series() {
        let a = ComplexMatrix::from_fn(3, 3, |i, j| c(0.1 * i as f64 - 0.2, 0.3 * j as f64));
        let e = mat_exp(&a, c(0.4, 0.2)).unwrap();
        assert!(max_abs_diff(&e, &taylor_exp(&a, c(0.4, 0.2))) < 1e-12);
        let b = ComplexMatrix::from_row_slice(2, 2, &[c(0.3, 0.1), c(-1.0, 2.0), c(0.5, 0.0), c(0.0, -0.7)]);
        let e = mat_exp(&b, c(1.3, -0.4)).unwrap();
        assert!(max_abs_diff(&e, &taylor_exp(&b, c(1.3, -0.4))) < 1e-12);
    }

    #[test]
    fn exp_inverse_pairs() {
        for d in [2, 3, 5] {
            let h = random_hermitian(d, d as u64 + 11);
            for s in [0.3, -4.0, 10.0] {
                let p = mat_exp(&h, c(0.0, s)).unwrap() * mat_exp(&h, c(0.0, -s)).unwrap();
                assert!(max_abs_diff(&p, &identity(d)) < 1e-11);
            }
        }
    }

    #[test]
    fn non_finite_input_is_domain_error() {
        let mut a = sigma_x();
        a[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(mat_exp(&a, ONE), Err(Error::Domain(_))));
    }

    #[test]
    fn pauli_decompose_roundtrip() {
        let a = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 2.0), c(3.0, -1.0), c(0.5, 0.5), c(-2.0, 0.0)]);
        let (a0, b) = pauli_decompose(&a);
        assert!(max_abs_diff(&pauli_compose(a0, b), &a) < 1e-15);
    }

    #[test]
    fn superop_reproduces_map() {
        let h = random_hermitian(3, 7);
        let s = superop_from_fn(3, |x| commutator(&h, x));
        let rho = random_hermitian(3, 8);
        assert!(max_abs_diff(&apply_superop(&s, &rho), &commutator(&h, &rho)) < 1e-14);
    }

    #[test]
    fn lindblad_term_is_traceless() {
        let l = ComplexMatrix::from_fn(3, 3, |i, j| c(i as f64, -(j as f64)));
        let rho = random_hermitian(3, 3);
        assert!(trace(&lindblad_term(&l, &rho)).norm() < 1e-14);
    }
}
