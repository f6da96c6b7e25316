// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Hamiltonian ensembles {(H̄ + V_ε, p_ε)} and exact disorder-averaging oracles.
//!
//! Everything the second-order master equations need from an ensemble is the
//! second-moment map X ↦ E_ε[V_ε X V_ε]; [`HamiltonianEnsemble::second_moment`]
//! returns it as a d²×d² superoperator, either in closed form or sampled.

use rayon::prelude::*;

use crate::centralspin::weingarten_haar_integral;
use crate::error::{Error, Result};
use crate::qcore::linalg::{
    c, hermitian_part, is_hermitian, mat_exp, real, sigma_x, sigma_y, sigma_z,
    superop_from_fn, zeros, ComplexMatrix, C64,
};
use crate::qcore::rng::{gaussian, haar_unitary, RngStream};
use crate::qcore::state::DensityMatrix;
use crate::qcore::Units;
use crate::qcore::quadrature::{gauss_hermite, gauss_legendre};

/// Distribution p_Δ of the central-spin level spacing.
#[derive(Clone, Debug, PartialEq)]
pub enum DeltaDistribution {
    /// Δ = √(Δ̄²) in every realization.
    Fixed,
    /// Δ ~ N(0, Δ̄²).
    Gaussian,
    /// Discrete (value, weight) pairs; weights are normalised on use.
    Custom(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CentralSpinEnsembleSpec {
    /// Angular frequency ω of H̄ = ħωσ_z.
    pub omega: f64,
    /// Δ̄² = ∫dΔ p_Δ Δ² (energy²).
    pub delta_sq_mean: f64,
    pub delta_dist: DeltaDistribution,
}

impl CentralSpinEnsembleSpec {
    pub fn new(omega: f64, delta_sq_mean: f64) -> Self {
        Self { omega, delta_sq_mean, delta_dist: DeltaDistribution::Fixed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_sq_mean >= 0.0) || !self.omega.is_finite() {
            return Err(Error::Domain(format!(
                "central spin: need finite ω and Δ̄² >= 0 (got ω = {}, Δ̄² = {})",
                self.omega, self.delta_sq_mean
            )));
        }
        if let DeltaDistribution::Custom(pairs) = &self.delta_dist {
            let w: f64 = pairs.iter().map(|p| p.1).sum();
            if pairs.is_empty() || pairs.iter().any(|p| p.1 < 0.0) || w <= 0.0 {
                return Err(Error::Domain("custom p_Δ needs nonnegative weights".into()));
            }
            let m2 = pairs.iter().map(|(d, p)| p * d * d).sum::<f64>() / w;
            if (m2 - self.delta_sq_mean).abs() > 1e-12 * self.delta_sq_mean.max(1.0) {
                return Err(Error::Domain(format!(
                    "custom p_Δ has second moment {m2}, expected Δ̄² = {}",
                    self.delta_sq_mean
                )));
            }
        }
        Ok(())
    }

    /// Draw a level spacing Δ from p_Δ.
    pub fn sample_delta(&self, rng: &mut RngStream) -> f64 {
        let rms = self.delta_sq_mean.sqrt();
        match &self.delta_dist {
            DeltaDistribution::Fixed => rms,
            DeltaDistribution::Gaussian => gaussian(rng, 0.0, rms).expect("rms >= 0"),
            DeltaDistribution::Custom(pairs) => {
                let total: f64 = pairs.iter().map(|p| p.1).sum();
                let mut u = rng.uniform() * total;
                for (d, p) in pairs {
                    if u < *p {
                        return *d;
                    }
                    u -= p;
                }
                pairs.last().map(|p| p.0).unwrap_or(rms)
            }
        }
    }

    /// Deterministic (node, weight) rule for p_Δ.
    fn delta_rule(&self, n_delta: usize) -> Vec<(f64, f64)> {
        let rms = self.delta_sq_mean.sqrt();
        match &self.delta_dist {
            DeltaDistribution::Fixed => vec![(rms, 1.0)],
            DeltaDistribution::Gaussian => gauss_hermite(n_delta.max(1))
                .into_iter()
                .map(|(x, w)| (rms * x, w))
                .collect(),
            DeltaDistribution::Custom(pairs) => {
                let total: f64 = pairs.iter().map(|p| p.1).sum();
                pairs.iter().map(|(d, p)| (*d, p / total)).collect()
            }
        }
    }
}

/// A finite weighted set of disorder potentials V_ε (already centred).
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDisorder {
    pub potentials: Vec<ComplexMatrix>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EnsembleKind {
    CentralSpin(CentralSpinEnsembleSpec),
    /// H_ε = ħ(ω + ε)σ_z with ε ~ N(0, s²).
    ScalarDephasing { omega: f64, s: f64 },
    Custom(DiscreteDisorder),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindTag {
    CentralSpin,
    ScalarDephasing,
    Custom,
}

/// How E_ε[·] is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Expectation {
    #[default]
    ClosedForm,
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianEnsemble {
    dim: usize,
    h_bar_avg: ComplexMatrix,
    kind: EnsembleKind,
    units: Units,
}

impl HamiltonianEnsemble {
    pub fn central_spin(spec: CentralSpinEnsembleSpec, units: Units) -> Result<Self> {
        spec.validate()?;
        let h = sigma_z() * real(units.hbar * spec.omega);
        Ok(Self { dim: 2, h_bar_avg: h, kind: EnsembleKind::CentralSpin(spec), units })
    }

    pub fn scalar_dephasing(omega: f64, s: f64, units: Units) -> Result<Self> {
        if !(s >= 0.0) || !omega.is_finite() {
            return Err(Error::Domain(format!("scalar dephasing: invalid ω = {omega}, s = {s}")));
        }
        let h = sigma_z() * real(units.hbar * omega);
        Ok(Self { dim: 2, h_bar_avg: h, kind: EnsembleKind::ScalarDephasing { omega, s }, units })
    }

    /// Ensemble from explicit realizations (H_ε, p_ε). H̄ is the weighted mean
    /// and V_ε = H_ε − H̄.
    pub fn discrete(realizations: Vec<(ComplexMatrix, f64)>, units: Units) -> Result<Self> {
        let first = realizations
            .first()
            .ok_or_else(|| Error::Domain("empty ensemble".into()))?;
        let d = first.0.nrows();
        let total: f64 = realizations.iter().map(|r| r.1).sum();
        if realizations.iter().any(|r| r.1 < 0.0) || !(total > 0.0) {
            return Err(Error::Domain("ensemble weights must be nonnegative with positive sum".into()));
        }
        let mut h_bar = zeros(d);
        for (h, p) in &realizations {
            if h.nrows() != d || h.ncols() != d {
                return Err(Error::Dimension { expected: d, got: h.nrows() });
            }
            if !is_hermitian(h, 1e-12 * (1.0 + crate::qcore::linalg::max_abs(h))) {
                return Err(Error::Domain("ensemble Hamiltonians must be Hermitian".into()));
            }
            h_bar += h * real(p / total);
        }
        let h_bar = hermitian_part(&h_bar);
        let potentials = realizations.iter().map(|(h, _)| hermitian_part(&(h - &h_bar))).collect();
        let weights = realizations.iter().map(|r| r.1 / total).collect();
        Ok(Self {
            dim: d,
            h_bar_avg: h_bar,
            kind: EnsembleKind::Custom(DiscreteDisorder { potentials, weights }),
            units,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h_bar_avg(&self) -> &ComplexMatrix {
        &self.h_bar_avg
    }

    pub fn kind(&self) -> &EnsembleKind {
        &self.kind
    }

    pub fn tag(&self) -> KindTag {
        match self.kind {
            EnsembleKind::CentralSpin(_) => KindTag::CentralSpin,
            EnsembleKind::ScalarDephasing { .. } => KindTag::ScalarDephasing,
            EnsembleKind::Custom(_) => KindTag::Custom,
        }
    }

    pub fn units(&self) -> Units {
        self.units
    }

    pub fn hbar(&self) -> f64 {
        self.units.hbar
    }

    /// Draw one disorder potential V_ε.
    pub fn sample_realization(&self, rng: &mut RngStream) -> Result<ComplexMatrix> {
        match &self.kind {
            EnsembleKind::CentralSpin(spec) => {
                let w = haar_unitary(2, rng)?;
                let delta = spec.sample_delta(rng);
                Ok(hermitian_part(&(&w * sigma_z() * w.adjoint())) * real(delta / 2.0))
            }
            EnsembleKind::ScalarDephasing { s, .. } => {
                let eps = gaussian(rng, 0.0, *s)?;
                Ok(sigma_z() * real(self.units.hbar * eps))
            }
            EnsembleKind::Custom(disc) => {
                let mut u = rng.uniform();
                for (v, p) in disc.potentials.iter().zip(&disc.weights) {
                    if u < *p {
                        return Ok(v.clone());
                    }
                    u -= p;
                }
                Ok(disc.potentials.last().expect("non-empty").clone())
            }
        }
    }

    /// Closed-form second moment X ↦ E_ε[V_ε X V_ε] as a function.
    pub fn second_moment_apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        match &self.kind {
            EnsembleKind::CentralSpin(spec) => {
                let sz = sigma_z();
                weingarten_haar_integral(&sz, x, &sz, 2).expect("d = 2")
                    * real(spec.delta_sq_mean / 4.0)
            }
            EnsembleKind::ScalarDephasing { s, .. } => {
                let sz = sigma_z();
                &sz * x * &sz * real((self.units.hbar * s).powi(2))
            }
            EnsembleKind::Custom(disc) => {
                let mut acc = zeros(self.dim);
                for (v, p) in disc.potentials.iter().zip(&disc.weights) {
                    acc += v * x * v * real(*p);
                }
                acc
            }
        }
    }

    /// Second-moment superoperator 𝓜 with 𝓜 vec(X) = vec(E[V X V]).
    pub fn second_moment(&self, expectation: Expectation) -> Result<ComplexMatrix> {
        match expectation {
            Expectation::ClosedForm => {
                Ok(superop_from_fn(self.dim, |x| self.second_moment_apply(x)))
            }
            Expectation::MonteCarlo { samples, seed } => {
                if samples == 0 {
                    return Err(Error::Config("Monte-Carlo expectation needs samples >= 1".into()));
                }
                let d = self.dim;
                let n = d * d;
                let blocks = block_ranges(samples, 256);
                let partial: Result<Vec<ComplexMatrix>> = blocks
                    .par_iter()
                    .map(|range| {
                        let mut acc = ComplexMatrix::zeros(n, n);
                        for k in range.clone() {
                            let mut rng = RngStream::new(seed, k as u64);
                            let v = self.sample_realization(&mut rng)?;
                            // vec(V X V) = (Vᵀ ⊗ V) vec(X)
                            acc += v.transpose().kronecker(&v);
                        }
                        Ok(acc)
                    })
                    .collect();
                let mut total = ComplexMatrix::zeros(n, n);
                for p in partial? {
                    total += p;
                }
                Ok(total / real(samples as f64))
            }
        }
    }
}

fn block_ranges(n: usize, block: usize) -> Vec<std::ops::Range<usize>> {
    (0..n.div_ceil(block)).map(|b| b * block..((b + 1) * block).min(n)).collect()
}

/// Where a trajectory came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    Mc,
    Me,
    Exact,
}

impl Source {
    pub fn label(self) -> &'static str {
        match self {
            Source::Mc => "mc",
            Source::Me => "me",
            Source::Exact => "exact",
        }
    }
}

/// Time series of density matrices.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Standard error of the Bloch components (x, y, z) per time; empty for
    /// deterministic sources. For d ≠ 2 the components are taken from the
    /// corner coherence ρ_{0,d−1} and the population difference ρ_00 − ρ_{d−1,d−1}.
    pub stderr: Vec<[f64; 3]>,
    pub source: Source,
    /// First time at which the perturbative validity guard tripped, if any.
    pub breach_time: Option<f64>,
}

impl TrajectoryRecord {
    pub fn purities(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.purity()).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Order of the realization sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Realizations summed strictly in index order on one thread.
    Serial,
    /// Fixed-size blocks summed in parallel, block partials added in order.
    /// Deterministic for any thread count, but differs from `Serial` at
    /// rounding level (≤ 1e-13).
    #[default]
    Parallel,
}

const MC_BLOCK: usize = 32;

pub(crate) fn check_time_grid(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Config("empty time grid".into()));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Bloch components for d = 2; the analogous corner quantities otherwise.
fn bloch_like(r: &ComplexMatrix) -> [f64; 3] {
    let n = r.nrows() - 1;
    let coh = r[(0, n)];
    [2.0 * coh.re, -2.0 * coh.im, (r[(0, 0)] - r[(n, n)]).re]
}

struct Accumulator {
    rho: Vec<ComplexMatrix>,
    first: Vec<[f64; 3]>,
    second: Vec<[f64; 3]>,
}

impl Accumulator {
    fn new(d: usize, nt: usize) -> Self {
        Self { rho: vec![zeros(d); nt], first: vec![[0.0; 3]; nt], second: vec![[0.0; 3]; nt] }
    }

    fn add_state(&mut self, i: usize, r: &ComplexMatrix, w: f64) {
        self.rho[i] += r * real(w);
        let comps = bloch_like(r);
        for k in 0..3 {
            self.first[i][k] += w * comps[k];
            self.second[i][k] += w * comps[k] * comps[k];
        }
    }

    fn merge(&mut self, other: Accumulator) {
        for (i, r) in other.rho.into_iter().enumerate() {
            self.rho[i] += r;
            for k in 0..3 {
                self.first[i][k] += other.first[i][k];
                self.second[i][k] += other.second[i][k];
            }
        }
    }
}

fn evolve_realization(
    h: &ComplexMatrix,
    rho0: &ComplexMatrix,
    times: &[f64],
    hbar: f64,
    acc: &mut Accumulator,
    weight: f64,
) -> Result<()> {
    for (i, &t) in times.iter().enumerate() {
        let u = mat_exp(h, c(0.0, -t / hbar))?;
        let r = &u * rho0 * u.adjoint();
        acc.add_state(i, &r, weight);
    }
    Ok(())
}

/// ρ̄(t) = (1/K) Σ_k U_k(t) ρ₀ U_k†(t) with realization k drawn from stream k.
pub fn mc_average_evolution(
    ens: &HamiltonianEnsemble,
    rho0: &DensityMatrix,
    times: &[f64],
    realizations: usize,
    rng: &RngStream,
    reduction: Reduction,
) -> Result<TrajectoryRecord> {
    if realizations == 0 {
        return Err(Error::Config("need at least one realization (K >= 1)".into()));
    }
    if rho0.dim() != ens.dim() {
        return Err(Error::Dimension { expected: ens.dim(), got: rho0.dim() });
    }
    check_time_grid(times)?;
    let d = ens.dim();
    let nt = times.len();
    let hbar = ens.hbar();
    let run_block = |range: std::ops::Range<usize>| -> Result<Accumulator> {
        let mut acc = Accumulator::new(d, nt);
        for k in range {
            let mut stream = rng.substream(k as u64);
            let v = ens.sample_realization(&mut stream)?;
            let h = ens.h_bar_avg() + v;
            evolve_realization(&h, rho0.matrix(), times, hbar, &mut acc, 1.0)?;
        }
        Ok(acc)
    };
    let total = match reduction {
        Reduction::Serial => run_block(0..realizations)?,
        Reduction::Parallel => {
            let parts: Result<Vec<Accumulator>> = block_ranges(realizations, MC_BLOCK)
                .into_par_iter()
                .map(run_block)
                .collect();
            let mut parts = parts?.into_iter();
            let mut total = parts.next().expect("at least one block");
            for p in parts {
                total.merge(p);
            }
            total
        }
    };
    let kf = realizations as f64;
    let mut states = Vec::with_capacity(nt);
    let mut stderr = Vec::with_capacity(nt);
    for i in 0..nt {
        let mean = hermitian_part(&(&total.rho[i] / real(kf)));
        let mut se = [0.0; 3];
        for k in 0..3 {
            let m = total.first[i][k] / kf;
            let var = if realizations > 1 {
                ((total.second[i][k] / kf - m * m) * kf / (kf - 1.0)).max(0.0)
            } else {
                0.0
            };
            se[k] = (var / kf).sqrt();
        }
        states.push(DensityMatrix::from_matrix_unchecked(mean));
        stderr.push(se);
    }
    Ok(TrajectoryRecord { times: times.to_vec(), states, stderr, source: Source::Mc, breach_time: None })
}

/// Resolution of the deterministic central-spin ensemble average.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SphereRule {
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_delta: usize,
}

impl Default for SphereRule {
    fn default() -> Self {
        Self { n_theta: 48, n_phi: 96, n_delta: 24 }
    }
}

/// Numerically exact central-spin ensemble average.
///
/// The Haar average over W only sees the unit vector n with Wσ_zW† = n·σ,
/// which is uniform on the sphere; the sphere is integrated with a
/// Gauss–Legendre (cos θ) × trapezoidal (φ) product rule and p_Δ with its own
/// rule. Converges spectrally for smooth dynamics.
pub fn quadrature_average_evolution(
    ens: &HamiltonianEnsemble,
    rho0: &DensityMatrix,
    times: &[f64],
    rule: SphereRule,
) -> Result<TrajectoryRecord> {
    let spec = match ens.kind() {
        EnsembleKind::CentralSpin(spec) => spec,
        _ => return Err(Error::Config("sphere quadrature is only defined for the central-spin ensemble".into())),
    };
    check_time_grid(times)?;
    if rho0.dim() != 2 {
        return Err(Error::Dimension { expected: 2, got: rho0.dim() });
    }
    let deltas = spec.delta_rule(rule.n_delta);
    let thetas = gauss_legendre(rule.n_theta);
    let nt = times.len();
    let hbar = ens.hbar();
    let (sx, sy, sz) = (sigma_x(), sigma_y(), sigma_z());
    let parts: Result<Vec<Accumulator>> = thetas
        .par_iter()
        .map(|&(cos_t, w_t)| {
            let mut acc = Accumulator::new(2, nt);
            let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
            for j in 0..rule.n_phi {
                let phi = std::f64::consts::TAU * j as f64 / rule.n_phi as f64;
                let n_sigma = &sx * real(sin_t * phi.cos()) + &sy * real(sin_t * phi.sin()) + &sz * real(cos_t);
                for &(delta, w_d) in &deltas {
                    let h = ens.h_bar_avg() + &n_sigma * real(delta / 2.0);
                    let w = 0.5 * w_t / rule.n_phi as f64 * w_d;
                    evolve_realization(&h, rho0.matrix(), times, hbar, &mut acc, w)?;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut parts = parts?.into_iter();
    let mut total = parts.next().expect("n_theta >= 1");
    for p in parts {
        total.merge(p);
    }
    let states = total
        .rho
        .into_iter()
        .map(|r| DensityMatrix::from_matrix_unchecked(hermitian_part(&r)))
        .collect();
    Ok(TrajectoryRecord { times: times.to_vec(), states, stderr: Vec::new(), source: Source::Exact, breach_time: None })
}

/// ρ̄_↑↓(t)/ρ̄_↑↓(0) for H_ε = ħ(ω+ε)σ_z with ε ~ N(0, s²): e^{−2iωt} e^{−2s²t²}.
pub fn dephasing_exact_offdiagonal(omega: f64, s: f64, t: f64) -> C64 {
    C64::from_polar((-2.0 * s * s * t * t).exp(), -2.0 * omega * t)
}
