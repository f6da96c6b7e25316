// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random streams, Gaussian variates and Haar-random unitaries.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::linalg::{c, ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Deterministic random stream identified by `(seed, stream)`.
///
/// Streams with the same seed and different ids are statistically
/// independent; identical pairs reproduce identical sequences.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A new independent stream derived from this one's seed.
    pub fn substream(&self, id: u64) -> Self {
        Self::new(self.seed ^ self.stream.wrapping_mul(0x9E37_79B9_7F4A_7C15), id)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Circular complex normal with E|z|² = 1.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        c(s * self.standard_normal(), s * self.standard_normal())
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Normal variate with the given mean and standard deviation.
pub fn gaussian(rng: &mut RngStream, mean: f64, sd: f64) -> Result<f64> {
    if !(sd >= 0.0) || !sd.is_finite() || !mean.is_finite() {
        return Err(Error::Domain(format!("gaussian: invalid sd {sd} / mean {mean}")));
    }
    if sd == 0.0 {
        return Ok(mean);
    }
    Ok(mean + sd * rng.standard_normal())
}

/// Haar-distributed d×d unitary: QR of a complex Ginibre matrix with the
/// diagonal phases of R moved into Q.
pub fn haar_unitary(d: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::Domain("haar_unitary: d must be >= 1".into()));
    }
    if d == 1 {
        let phi = std::f64::consts::TAU * rng.uniform();
        return Ok(ComplexMatrix::from_element(1, 1, C64::from_polar(1.0, phi)));
    }
    let z = ComplexMatrix::from_fn(d, d, |_, _| rng.complex_normal());
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::linalg::{identity, max_abs_diff, sigma_z, zeros};

    #[test]
    fn zero_sd_returns_mean() {
        let mut r = RngStream::new(1, 0);
        assert_eq!(gaussian(&mut r, 2.5, 0.0).unwrap(), 2.5);
    }

    #[test]
    fn negative_sd_rejected() {
        let mut r = RngStream::new(1, 0);
        assert!(matches!(gaussian(&mut r, 0.0, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let a: Vec<f64> = {
            let mut r = RngStream::new(42, 3);
            (0..16).map(|_| r.standard_normal()).collect()
        };
        let b: Vec<f64> = {
            let mut r = RngStream::new(42, 3);
            (0..16).map(|_| r.standard_normal()).collect()
        };
        let other: Vec<f64> = {
            let mut r = RngStream::new(42, 4);
            (0..16).map(|_| r.standard_normal()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, other);
    }

    #[test]
    fn gaussian_sample_mean_within_clt_bound() {
        let mut r = RngStream::new(7, 0);
        let n = 1_000_000;
        let (mean, sd) = (1.5, 2.0);
        let s: f64 = (0..n).map(|_| gaussian(&mut r, mean, sd).unwrap()).sum();
        assert!((s / n as f64 - mean).abs() < 4.0 * sd / 1e3);
    }

    #[test]
    fn haar_d1_is_phase() {
        let mut r = RngStream::new(5, 0);
        let w = haar_unitary(1, &mut r).unwrap();
        assert!((w[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_is_unitary() {
        let mut r = RngStream::new(9, 1);
        for d in 1..6 {
            let w = haar_unitary(d, &mut r).unwrap();
            assert!(max_abs_diff(&(&w * w.adjoint()), &identity(d)) < 1e-12);
        }
    }

    #[test]
    fn haar_first_moment_vanishes_for_traceless_input() {
        // ∫ W X W† dμ = Tr(X)/d 𝟙
        let n = 100_000;
        let mut r = RngStream::new(11, 0);
        let mut acc = zeros(2);
        let sz = sigma_z();
        for _ in 0..n {
            let w = haar_unitary(2, &mut r).unwrap();
            acc += &w * &sz * w.adjoint();
        }
        acc /= C64::new(n as f64, 0.0);
        let bound = 3.0 / (n as f64).sqrt();
        assert!(acc.iter().all(|z| z.norm() < bound), "{acc}");
    }

    #[test]
    fn haar_third_order_moment_matches_weingarten_value() {
        // E[(Wσ_zW†) σ_z (Wσ_zW†)] = −σ_z/3
        let n = 100_000;
        let mut r = RngStream::new(12, 0);
        let sz = sigma_z();
        let mut acc = zeros(2);
        let mut sq = 0.0;
        for _ in 0..n {
            let w = haar_unitary(2, &mut r).unwrap();
            let v = &w * &sz * w.adjoint();
            let m = &v * &sz * &v;
            sq += m[(0, 0)].re * m[(0, 0)].re;
            acc += m;
        }
        acc /= C64::new(n as f64, 0.0);
        let se = (sq / n as f64 / n as f64).sqrt();
        let expected = sz * C64::new(-1.0 / 3.0, 0.0);
        assert!(max_abs_diff(&acc, &expected) < 4.0 * se.max(1e-3));
    }

    #[test]
    fn haar_left_invariance_of_second_moment() {
        // compare E|(UW)_{00}|² and E|(UW)_{01}|² against W alone (both 1/d)
        let n = 100_000;
        let u = haar_unitary(3, &mut RngStream::new(99, 0)).unwrap();
        let mut r = RngStream::new(13, 0);
        let (mut a, mut b) = (0.0, 0.0);
        let (mut ma, mut mb) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for _ in 0..n {
            let w = haar_unitary(3, &mut r).unwrap();
            let uw = &u * &w;
            a += w[(0, 1)].norm_sqr();
            b += uw[(0, 1)].norm_sqr();
            ma += w[(1, 2)];
            mb += uw[(1, 2)];
        }
        let nf = n as f64;
        // Var|W_ij|² = 2/(d(d+1)) − 1/d² for d = 3
        let se = ((1.0 / 6.0 - 1.0 / 9.0) / nf).sqrt();
        assert!((a / nf - 1.0 / 3.0).abs() < 4.0 * se.max(1e-3));
        assert!((b / nf - 1.0 / 3.0).abs() < 4.0 * se.max(1e-3));
        let se1 = (1.0 / 3.0 / nf).sqrt();
        assert!((ma / nf).norm() < 4.0 * se1);
        assert!((mb / nf).norm() < 4.0 * se1);
    }
}
