// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Gaussian quadrature rules (Golub–Welsch) and cumulative Simpson sums.

use nalgebra::DMatrix;

use super::linalg::{ComplexMatrix, C64};

/// Symmetric tridiagonal Jacobi matrix → (nodes, weights·μ₀).
fn golub_welsch(off: &[f64], mu0: f64) -> Vec<(f64, f64)> {
    let n = off.len() + 1;
    let mut j = DMatrix::<f64>::zeros(n, n);
    for (k, &b) in off.iter().enumerate() {
        j[(k, k + 1)] = b;
        j[(k + 1, k)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// n-point Gauss–Legendre rule on [−1, 1]; weights sum to 2.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "gauss_legendre needs n >= 1");
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    golub_welsch(&off, 2.0)
}

/// n-point Gauss–Hermite rule for the standard normal density; weights sum to 1.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "gauss_hermite needs n >= 1");
    let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    golub_welsch(&off, 1.0)
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    gauss_legendre(n).into_iter().map(|(x, w)| (m + h * x, h * w)).collect()
}

/// Values that can be added and scaled by reals.
pub trait Linear: Clone + std::ops::Add<Output = Self> {
    fn scaled(&self, a: f64) -> Self;
}

impl Linear for f64 {
    fn scaled(&self, a: f64) -> Self {
        self * a
    }
}

impl Linear for ComplexMatrix {
    fn scaled(&self, a: f64) -> Self {
        self * C64::new(a, 0.0)
    }
}

/// Running integrals I_k = ∫_{x₀}^{x_k} f on a uniform grid of spacing h.
///
/// Even nodes use composite Simpson; odd nodes add one quadratic-interpolant
/// panel to the previous even node, so every entry is third-order accurate.
pub fn cumulative_simpson<T: Linear>(f: &[T], h: f64) -> Vec<T> {
    let n = f.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    let zero = f[0].scaled(0.0);
    out.push(zero.clone());
    if n == 1 {
        return out;
    }
    if n == 2 {
        out.push((f[0].clone() + f[1].clone()).scaled(0.5 * h));
        return out;
    }
    let mut even = zero;
    for k in 1..n {
        if k % 2 == 0 {
            even = even + (f[k - 2].clone() + f[k - 1].scaled(4.0) + f[k].clone()).scaled(h / 3.0);
            out.push(even.clone());
        } else if k + 1 < n {
            let panel = (f[k - 1].scaled(5.0) + f[k].scaled(8.0) + f[k + 1].scaled(-1.0)).scaled(h / 12.0);
            out.push(even.clone() + panel);
        } else {
            // last odd node: integrate the final interval with the backward quadratic
            let panel = (f[k - 2].scaled(-1.0) + f[k - 1].scaled(8.0) + f[k].scaled(5.0)).scaled(h / 12.0);
            let prev = out[k - 1].clone();
            out.push(prev + panel);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(6);
        for p in 0..12 {
            let got: f64 = rule.iter().map(|(x, w)| w * x.powi(p)).sum();
            let want = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((got - want).abs() < 1e-13, "x^{p}: {got} vs {want}");
        }
    }

    #[test]
    fn hermite_reproduces_normal_moments() {
        let rule = gauss_hermite(10);
        let moments = [1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0];
        for (p, want) in moments.iter().enumerate() {
            let got: f64 = rule.iter().map(|(x, w)| w * x.powi(p as i32)).sum();
            assert!((got - want).abs() < 1e-11 * want.max(1.0), "moment {p}");
        }
    }

    #[test]
    fn mapped_rule_integrates_sine() {
        let got: f64 = gauss_legendre_on(20, 0.0, std::f64::consts::PI).iter().map(|(x, w)| w * x.sin()).sum();
        assert!((got - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_simpson_exact_for_quadratics() {
        let h = 0.1;
        let f: Vec<f64> = (0..11).map(|k| (k as f64 * h).powi(2)).collect();
        let got = cumulative_simpson(&f, h);
        for (k, g) in got.iter().enumerate() {
            let x = k as f64 * h;
            assert!((g - x.powi(3) / 3.0).abs() < 1e-14, "node {k}");
        }
        let f: Vec<f64> = (0..10).map(|k| (k as f64 * h).powi(2)).collect();
        let got = cumulative_simpson(&f, h);
        assert!((got[9] - 0.9f64.powi(3) / 3.0).abs() < 1e-14);
    }

    #[test]
    fn cumulative_simpson_converges_at_third_order_or_better() {
        let err = |n: usize| {
            let h = 2.0 / (n - 1) as f64;
            let f: Vec<f64> = (0..n).map(|k| (k as f64 * h).exp()).collect();
            let got = cumulative_simpson(&f, h);
            got.iter().enumerate().map(|(k, g)| (g - ((k as f64 * h).exp() - 1.0)).abs()).fold(0.0, f64::max)
        };
        let ratio = err(21) / err(41);
        assert!(ratio > 7.0, "ratio {ratio}");
    }
}
