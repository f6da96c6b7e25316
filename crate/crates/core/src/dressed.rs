// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Second-order disorder-dressed master equations for ρ̄.
//!
//! All three representations need only the second-moment map
//! 𝓜(X) = E_ε[V_ε X V_ε]. With Ū = e^{−iH̄t/ħ} and Ṽ = ŪVŪ†,
//!
//! ```text
//! E[V X Ṽ] = 𝓜(XŪ)Ū†      E[Ṽ X V] = Ū𝓜(Ū†X)      E[Ṽ X Ṽ] = Ū𝓜(Ū†XŪ)Ū†
//! ```
//!
//! The t′ integrals are accumulated once on a uniform kernel grid with
//! cumulative Simpson sums and stored as d²×d² superoperators per node.

use log::{debug, warn};

use crate::ensemble::{check_time_grid, Expectation, HamiltonianEnsemble, Source, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::qcore::linalg::{
    apply_superop, c, commutator, hermitian_part, hermiticity_defect, identity, mat_exp, real,
    superop_from_fn, trace, ComplexMatrix, I,
};
use crate::qcore::quadrature::cumulative_simpson;
use crate::qcore::state::DensityMatrix;

/// Ū(t)VŪ†(t) with Ū(t) = exp(−iH̄t/ħ).
pub fn interaction_potential(ens: &HamiltonianEnsemble, v: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    if v.nrows() != ens.dim() || v.ncols() != ens.dim() {
        return Err(Error::Dimension { expected: ens.dim(), got: v.nrows() });
    }
    if t == 0.0 {
        return Ok(v.clone());
    }
    let u = mat_exp(ens.h_bar_avg(), c(0.0, -t / ens.hbar()))?;
    Ok(hermitian_part(&(&u * v * u.adjoint())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Redfield,
    Lindblad,
    ShortTime,
}

/// Uniform t′ grid on which the kernel integrals are tabulated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelGrid {
    pub t_max: f64,
    pub spacing: f64,
}

impl KernelGrid {
    /// Grid whose nodes include every RK4 stage time of a step `dt`.
    pub fn for_step(t_max: f64, dt: f64) -> Self {
        Self { t_max, spacing: 0.5 * dt }
    }

    fn nodes(&self) -> Result<usize> {
        if !(self.spacing > 0.0) || !(self.t_max >= 0.0) || !self.t_max.is_finite() {
            return Err(Error::Config(format!(
                "kernel grid needs spacing > 0 and t_max >= 0 (got {:?})",
                self
            )));
        }
        let n = (self.t_max / self.spacing - 1e-9).ceil().max(0.0) as usize;
        Ok(n.max(1) + 1)
    }
}

#[derive(Clone, Debug)]
enum Storage {
    Grid {
        spacing: f64,
        /// Full generator superoperator per node.
        generator: Vec<ComplexMatrix>,
        /// Non-unitary part per node (the Lindblad dissipator, or everything
        /// beyond −(i/ħ)[H̄,·] for the Redfield form).
        dissipator: Vec<ComplexMatrix>,
        h_eff: Vec<ComplexMatrix>,
    },
    ShortTime {
        second_moment: ComplexMatrix,
        m_one: ComplexMatrix,
        h_shift: ComplexMatrix,
    },
}

/// Time-dependent generator ρ ↦ ∂_tρ̄.
#[derive(Clone, Debug)]
pub struct DressedGenerator {
    representation: Representation,
    dim: usize,
    hbar: f64,
    h_bar_avg: ComplexMatrix,
    storage: Storage,
}

/// Evaluation at one time of the pieces of E over ε.
struct Moments {
    /// 𝓜 as a superoperator
    m: ComplexMatrix,
    u: ComplexMatrix,
}

impl Moments {
    fn mm(&self, x: &ComplexMatrix) -> ComplexMatrix {
        apply_superop(&self.m, x)
    }

    /// E[V X Ṽ]
    fn v_x_vt(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.mm(&(x * &self.u)) * self.u.adjoint()
    }

    /// E[Ṽ X V]
    fn vt_x_v(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.u * self.mm(&(self.u.adjoint() * x))
    }

    /// E[Ṽ X Ṽ]
    fn vt_x_vt(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &self.u * self.mm(&(self.u.adjoint() * x * &self.u)) * self.u.adjoint()
    }
}

fn von_neumann(h: &ComplexMatrix, hbar: f64) -> ComplexMatrix {
    let d = h.nrows();
    superop_from_fn(d, |rho| commutator(h, rho) * (-I / hbar))
}

fn node_times(grid: &KernelGrid) -> Result<(usize, Vec<f64>)> {
    let n = grid.nodes()?;
    Ok((n, (0..n).map(|k| k as f64 * grid.spacing).collect()))
}

fn check_expectation(e: Expectation) -> Result<()> {
    if let Expectation::MonteCarlo { samples: 0, .. } = e {
        return Err(Error::Config("Monte-Carlo expectation needs samples >= 1".into()));
    }
    Ok(())
}

/// Time-nonlocal form: ∂_tρ̄ = −(i/ħ)[H̄,ρ̄] − (1/ħ²)E∫₀ᵗdt′[V,[Ṽ(t′),ρ̄]].
pub fn build_redfield(ens: &HamiltonianEnsemble, grid: KernelGrid, expectation: Expectation) -> Result<DressedGenerator> {
    check_expectation(expectation)?;
    let (d, hbar) = (ens.dim(), ens.hbar());
    let m = ens.second_moment(expectation)?;
    let (_, times) = node_times(&grid)?;
    let mut integrand = Vec::with_capacity(times.len());
    for &tp in &times {
        let u = mat_exp(ens.h_bar_avg(), c(0.0, -tp / hbar))?;
        let mo = Moments { m: m.clone(), u };
        let e_v_vt = mo.mm(&mo.u) * mo.u.adjoint();
        let e_vt_v = &mo.u * mo.mm(&mo.u.adjoint());
        // E[V,[Ṽ,ρ]] = E[VṼ]ρ − E[VρṼ] − E[ṼρV] + ρE[ṼV]
        let k = superop_from_fn(d, |rho| &e_v_vt * rho - mo.v_x_vt(rho) - mo.vt_x_v(rho) + rho * &e_vt_v);
        integrand.push(k * real(-1.0 / (hbar * hbar)));
    }
    let dissipator = cumulative_simpson(&integrand, grid.spacing);
    let vn = von_neumann(ens.h_bar_avg(), hbar);
    let generator = dissipator.iter().map(|dk| &vn + dk).collect();
    Ok(DressedGenerator {
        representation: Representation::Redfield,
        dim: d,
        hbar,
        h_bar_avg: ens.h_bar_avg().clone(),
        storage: Storage::Grid {
            spacing: grid.spacing,
            generator,
            dissipator,
            h_eff: vec![ens.h_bar_avg().clone(); times.len()],
        },
    })
}

/// E𝓛(L,·) for L = (V + αṼ)/2 as a superoperator.
fn lindblad_channel(mo: &Moments, alpha: f64, e_v2: &ComplexMatrix, d: usize) -> ComplexMatrix {
    let e_vt2 = &mo.u * e_v2 * mo.u.adjoint();
    let e_v_vt = mo.mm(&mo.u) * mo.u.adjoint();
    let e_vt_v = &mo.u * mo.mm(&mo.u.adjoint());
    // E[L²] = ¼E[V² + αVṼ + αṼV + Ṽ²]
    let l2 = (e_v2 + (&e_v_vt + &e_vt_v) * real(alpha) + &e_vt2) * real(0.25);
    superop_from_fn(d, |rho| {
        let lrl = (mo.mm(rho) + (mo.v_x_vt(rho) + mo.vt_x_v(rho)) * real(alpha) + mo.vt_x_vt(rho)) * real(0.25);
        lrl - (&l2 * rho + rho * &l2) * real(0.5)
    })
}

/// Lindblad form: H_eff(t) = H̄ − (i/2ħ)E∫[V,Ṽ] and dissipators
/// Σ_α (2α/ħ²) E∫𝓛(L^{(α)}, ·) with L^{(α)} = (V + αṼ)/2.
pub fn build_lindblad(ens: &HamiltonianEnsemble, grid: KernelGrid, expectation: Expectation) -> Result<DressedGenerator> {
    check_expectation(expectation)?;
    let (d, hbar) = (ens.dim(), ens.hbar());
    let m = ens.second_moment(expectation)?;
    let (_, times) = node_times(&grid)?;
    let e_v2 = apply_superop(&m, &identity(d));
    let mut comm = Vec::with_capacity(times.len());
    let mut diss = Vec::with_capacity(times.len());
    for &tp in &times {
        let u = mat_exp(ens.h_bar_avg(), c(0.0, -tp / hbar))?;
        let mo = Moments { m: m.clone(), u };
        let e_v_vt = mo.mm(&mo.u) * mo.u.adjoint();
        let e_vt_v = &mo.u * mo.mm(&mo.u.adjoint());
        comm.push(e_v_vt - e_vt_v);
        let plus = lindblad_channel(&mo, 1.0, &e_v2, d);
        let minus = lindblad_channel(&mo, -1.0, &e_v2, d);
        diss.push((plus - minus) * real(2.0 / (hbar * hbar)));
    }
    let comm_int = cumulative_simpson(&comm, grid.spacing);
    let dissipator = cumulative_simpson(&diss, grid.spacing);
    let h_eff: Vec<ComplexMatrix> = comm_int
        .iter()
        .map(|ci| hermitian_part(&(ens.h_bar_avg() + ci * (-I / (2.0 * hbar)))))
        .collect();
    let generator = h_eff.iter().zip(&dissipator).map(|(h, dk)| von_neumann(h, hbar) + dk).collect();
    Ok(DressedGenerator {
        representation: Representation::Lindblad,
        dim: d,
        hbar,
        h_bar_avg: ens.h_bar_avg().clone(),
        storage: Storage::Grid { spacing: grid.spacing, generator, dissipator, h_eff },
    })
}

/// Next-to-leading short-time form with H_eff(t) = H̄ + (t²/4ħ²)E[V,[V,H̄]],
/// L(t) = e^{−iH̄t/4ħ}Ve^{iH̄t/4ħ} and rate 2t/ħ².
pub fn build_short_time(ens: &HamiltonianEnsemble, expectation: Expectation) -> Result<DressedGenerator> {
    check_expectation(expectation)?;
    let (d, hbar) = (ens.dim(), ens.hbar());
    let m = ens.second_moment(expectation)?;
    let h = ens.h_bar_avg();
    let m_one = apply_superop(&m, &identity(d));
    // E[V,[V,H̄]] = E[V²]H̄ − 2E[VH̄V] + H̄E[V²]
    let h_shift = hermitian_part(&(&m_one * h - apply_superop(&m, h) * real(2.0) + h * &m_one));
    Ok(DressedGenerator {
        representation: Representation::ShortTime,
        dim: d,
        hbar,
        h_bar_avg: h.clone(),
        storage: Storage::ShortTime { second_moment: m, m_one, h_shift },
    })
}

impl DressedGenerator {
    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Largest time covered by the tabulated kernel (∞ for the short-time form).
    pub fn t_max(&self) -> f64 {
        match &self.storage {
            Storage::Grid { spacing, generator, .. } => spacing * (generator.len() - 1) as f64,
            Storage::ShortTime { .. } => f64::INFINITY,
        }
    }

    /// Kernel-grid spacing (0 for the short-time form, which has no grid).
    pub fn kernel_spacing(&self) -> f64 {
        match &self.storage {
            Storage::Grid { spacing, .. } => *spacing,
            Storage::ShortTime { .. } => 0.0,
        }
    }

    fn interpolate(&self, pick: impl Fn(usize) -> ComplexMatrix, spacing: f64, len: usize, t: f64) -> Result<ComplexMatrix> {
        let x = t / spacing;
        let last = (len - 1) as f64;
        if !(x >= -1e-9) || x > last + 1e-9 {
            return Err(Error::Domain(format!("t = {t} outside the kernel grid [0, {}]", last * spacing)));
        }
        let k = x.round();
        if (x - k).abs() <= 1e-9 * x.max(1.0) {
            return Ok(pick(k as usize));
        }
        let k0 = (x.floor() as usize).min(len - 2);
        let w = x - k0 as f64;
        Ok(pick(k0) * real(1.0 - w) + pick(k0 + 1) * real(w))
    }

    fn short_time_pieces(&self, t: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let Storage::ShortTime { second_moment, m_one, h_shift } = &self.storage else {
            unreachable!()
        };
        let hbar = self.hbar;
        let h_eff = hermitian_part(&(&self.h_bar_avg + h_shift * real(t * t / (4.0 * hbar * hbar))));
        let w = mat_exp(&self.h_bar_avg, c(0.0, -t / (4.0 * hbar)))?;
        let wd = w.adjoint();
        let l2 = &w * m_one * &wd;
        let rate = 2.0 * t / (hbar * hbar);
        let diss = superop_from_fn(self.dim, |rho| {
            let lrl = &w * apply_superop(second_moment, &(&wd * rho * &w)) * &wd;
            (lrl - (&l2 * rho + rho * &l2) * real(0.5)) * real(rate)
        });
        Ok((h_eff, diss))
    }

    /// Ĥ_eff(t). The Redfield form has no split and reports H̄.
    pub fn h_eff(&self, t: f64) -> Result<ComplexMatrix> {
        match &self.storage {
            Storage::Grid { spacing, h_eff, .. } => {
                self.interpolate(|k| h_eff[k].clone(), *spacing, h_eff.len(), t)
            }
            Storage::ShortTime { .. } => Ok(self.short_time_pieces(t)?.0),
        }
    }

    /// Superoperator of ρ ↦ D_t(ρ).
    pub fn dissipator(&self, t: f64) -> Result<ComplexMatrix> {
        match &self.storage {
            Storage::Grid { spacing, dissipator, .. } => {
                self.interpolate(|k| dissipator[k].clone(), *spacing, dissipator.len(), t)
            }
            Storage::ShortTime { .. } => Ok(self.short_time_pieces(t)?.1),
        }
    }

    /// Full generator superoperator at time t.
    pub fn superop(&self, t: f64) -> Result<ComplexMatrix> {
        match &self.storage {
            Storage::Grid { spacing, generator, .. } => {
                self.interpolate(|k| generator[k].clone(), *spacing, generator.len(), t)
            }
            Storage::ShortTime { .. } => {
                let (h, diss) = self.short_time_pieces(t)?;
                Ok(von_neumann(&h, self.hbar) + diss)
            }
        }
    }

    /// ∂_tρ̄ at time t.
    pub fn apply(&self, t: f64, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.nrows() != self.dim || rho.ncols() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: rho.nrows() });
        }
        Ok(apply_superop(&self.superop(t)?, rho))
    }

    /// Disorder-induced part of the generator, G_t + (i/ħ)[H̄,·].
    fn disorder_part(&self, t: f64) -> Result<ComplexMatrix> {
        Ok(self.superop(t)? - von_neumann(&self.h_bar_avg, self.hbar))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorSpec {
    pub method: Method,
    pub dt: f64,
    pub t_max: f64,
    /// Divide by the trace after every step.
    pub renormalize: bool,
    /// Store every n-th step.
    pub record_every: usize,
}

impl IntegratorSpec {
    pub fn new(dt: f64, t_max: f64) -> Self {
        Self { method: Method::Rk4, dt, t_max, renormalize: false, record_every: 1 }
    }

    fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !(self.t_max >= 0.0) || !self.t_max.is_finite() || self.record_every == 0 {
            return Err(Error::Config(format!("invalid integrator settings {self:?}")));
        }
        let n = (self.t_max / self.dt).round();
        if (n * self.dt - self.t_max).abs() > 1e-9 * self.t_max.max(self.dt) {
            return Err(Error::Config(format!(
                "t_max = {} is not a multiple of dt = {}",
                self.t_max, self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// Accumulated disorder strength ∫‖G_t − G_H̄‖ dt past which the
/// second-order expansion is no longer trusted.
pub const VALIDITY_THRESHOLD: f64 = 0.5;

const TRACE_DRIFT_LIMIT: f64 = 1e-8;

fn spectral_norm(a: &ComplexMatrix) -> f64 {
    a.clone().svd(false, false).singular_values.max()
}

/// RK4 integration of ∂_tρ̄ = G_t(ρ̄) from t = 0.
pub fn integrate(generator: &DressedGenerator, rho0: &DensityMatrix, spec: IntegratorSpec) -> Result<TrajectoryRecord> {
    let steps = spec.steps()?;
    if rho0.dim() != generator.dim() {
        return Err(Error::Dimension { expected: generator.dim(), got: rho0.dim() });
    }
    let spacing = generator.kernel_spacing();
    if spacing > spec.dt * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "kernel grid spacing {spacing} is coarser than dt = {}",
            spec.dt
        )));
    }
    if spec.t_max > generator.t_max() * (1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "t_max = {} exceeds the kernel grid ({})",
            spec.t_max,
            generator.t_max()
        )));
    }
    let dt = spec.dt;
    let mut rho = rho0.matrix().clone();
    let mut times = vec![0.0];
    let mut states = vec![rho0.clone()];
    let mut strength = 0.0;
    let mut breach_time = None;
    let mut prev_rate = spectral_norm(&generator.disorder_part(0.0)?);
    let mut max_asym: f64 = 0.0;
    for n in 0..steps {
        let t = n as f64 * dt;
        let g0 = generator.superop(t)?;
        let gm = generator.superop(t + 0.5 * dt)?;
        let g1 = generator.superop((t + dt).min(spec.t_max))?;
        let k1 = apply_superop(&g0, &rho);
        let k2 = apply_superop(&gm, &(&rho + &k1 * real(0.5 * dt)));
        let k3 = apply_superop(&gm, &(&rho + &k2 * real(0.5 * dt)));
        let k4 = apply_superop(&g1, &(&rho + &k3 * real(dt)));
        let next = &rho + (k1 + k2 * real(2.0) + k3 * real(2.0) + k4) * real(dt / 6.0);
        max_asym = max_asym.max(hermiticity_defect(&next));
        rho = hermitian_part(&next);
        let tr = trace(&rho);
        let t_next = t + dt;
        if !tr.re.is_finite() || (tr - 1.0).norm() > TRACE_DRIFT_LIMIT {
            return Err(Error::Integration {
                t: t_next,
                reason: format!("trace drifted to {tr}"),
            });
        }
        if spec.renormalize {
            rho /= tr;
        }
        let rate = spectral_norm(&generator.disorder_part(t_next.min(spec.t_max))?);
        strength += 0.5 * dt * (prev_rate + rate);
        prev_rate = rate;
        if breach_time.is_none() && strength > VALIDITY_THRESHOLD {
            warn!(
                "accumulated disorder strength {strength:.3} exceeds {VALIDITY_THRESHOLD} at t = {t_next}; \
                 second-order results past this point are outside the perturbative regime"
            );
            breach_time = Some(t_next);
        }
        if (n + 1) % spec.record_every == 0 || n + 1 == steps {
            times.push(t_next);
            states.push(DensityMatrix::from_matrix_unchecked(rho.clone()));
        }
    }
    debug!("largest pre-symmetrisation Hermiticity defect {max_asym:e}");
    check_time_grid(&times)?;
    Ok(TrajectoryRecord { times, states, stderr: Vec::new(), source: Source::Me, breach_time })
}
