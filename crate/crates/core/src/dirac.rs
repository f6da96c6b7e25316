// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Random-mass Dirac particle H = v p σ_z + m(x)v² σ_x in one dimension.
//!
//! The analytic path propagates the characteristic spinor χ_t(s,q) with the
//! disorder kernels F̄^{(g)}, F̄^{(u)}; the oracle path integrates individual
//! mass-field realizations with a Strang split-step Fourier scheme.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::centralspin::sinc;
use crate::error::{Error, Result};
use crate::qcore::linalg::{pauli_exp, C64, I};
use crate::qcore::quadrature::gauss_legendre_on;
use crate::qcore::rng::RngStream;

/// Shape of the disorder correlator C(x) = ∫dq e^{iqx/ħ} G(q).
#[derive(Clone, Debug, PartialEq)]
pub enum CorrelatorForm {
    /// C(x) = C₀ exp[−(x/ℓ)²].
    Gaussian,
    /// G tabulated at nonnegative momenta (q, G(q)), extended evenly and
    /// linearly interpolated; rescaled so that ∫G = C₀.
    Table(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorSpec {
    /// Amplitude C₀ = C(0) (energy²).
    pub c0: f64,
    /// Correlation length ℓ.
    pub ell: f64,
    pub form: CorrelatorForm,
    pub hbar: f64,
    pub v: f64,
}

impl CorrelatorSpec {
    pub fn gaussian(c0: f64, ell: f64) -> Self {
        Self { c0, ell, form: CorrelatorForm::Gaussian, hbar: 1.0, v: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c0 >= 0.0) || !(self.ell > 0.0) || !(self.hbar > 0.0) || !(self.v > 0.0) {
            return Err(Error::Domain(format!(
                "correlator needs c0 >= 0, ell > 0, hbar > 0, v > 0 (got c0 = {}, ell = {}, hbar = {}, v = {})",
                self.c0, self.ell, self.hbar, self.v
            )));
        }
        if let CorrelatorForm::Table(t) = &self.form {
            if t.len() < 2 || t.iter().any(|&(q, g)| q < 0.0 || !(g >= 0.0)) {
                return Err(Error::Domain("G table needs >= 2 entries with q >= 0 and G >= 0".into()));
            }
            if t.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::Domain("G table momenta must be increasing".into()));
            }
        }
        Ok(())
    }

    /// ∫G over the raw table (both signs of q).
    fn table_mass(t: &[(f64, f64)]) -> f64 {
        let mut m = 0.0;
        for w in t.windows(2) {
            m += 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1);
        }
        // the first node is shared by both halves
        2.0 * m + if t[0].0 > 0.0 { 2.0 * t[0].0 * t[0].1 } else { 0.0 }
    }

    /// Momenta beyond which G is negligible (< 1e-16 relative).
    pub fn q_cutoff(&self) -> f64 {
        match &self.form {
            CorrelatorForm::Gaussian => 12.0 * self.hbar / self.ell,
            CorrelatorForm::Table(t) => t.last().map(|p| p.0).unwrap_or(0.0),
        }
    }

    /// Length scale of C(x) used to size quadrature steps.
    fn correlation_extent(&self) -> f64 {
        match &self.form {
            CorrelatorForm::Gaussian => 8.0 * self.ell,
            CorrelatorForm::Table(t) => {
                let dq = t.windows(2).map(|w| w[1].0 - w[0].0).fold(f64::INFINITY, f64::min);
                (8.0 * self.ell).max(2.0 * PI * self.hbar / dq)
            }
        }
    }

    /// Two-point correlator C(x).
    pub fn correlation(&self, x: f64) -> f64 {
        match &self.form {
            CorrelatorForm::Gaussian => self.c0 * (-(x / self.ell).powi(2)).exp(),
            CorrelatorForm::Table(_) => {
                let q = self.q_cutoff();
                gauss_legendre_on(400, -q, q)
                    .iter()
                    .map(|&(p, w)| w * g_of_q(self, p) * (p * x / self.hbar).cos())
                    .sum()
            }
        }
    }
}

/// Momentum-transfer distribution G(q).
pub fn g_of_q(spec: &CorrelatorSpec, q: f64) -> f64 {
    match &spec.form {
        CorrelatorForm::Gaussian => {
            spec.c0 * spec.ell / (2.0 * PI.sqrt() * spec.hbar) * (-(q * spec.ell / (2.0 * spec.hbar)).powi(2)).exp()
        }
        CorrelatorForm::Table(t) => {
            let a = q.abs();
            let mass = CorrelatorSpec::table_mass(t);
            if mass <= 0.0 {
                return 0.0;
            }
            let scale = spec.c0 / mass;
            if a <= t[0].0 {
                return scale * t[0].1;
            }
            match t.windows(2).find(|w| a <= w[1].0) {
                Some(w) => {
                    let f = (a - w[0].0) / (w[1].0 - w[0].0);
                    scale * (w[0].1 * (1.0 - f) + w[1].1 * f)
                }
                None => 0.0,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelMode {
    /// q′ quadrature of the finite-time kernels.
    Exact,
    /// vt ≫ ℓ, σ limit for F̄^{(g)}; F̄^{(u)} keeps its quadrature.
    LargeTime,
}

/// F̄_t^{(g)} and F̄_t^{(u)} for a carrier momentum p₀.
#[derive(Clone, Debug)]
pub struct DisorderKernels {
    pub spec: CorrelatorSpec,
    pub p0: f64,
    pub t_max: f64,
    pub mode: KernelMode,
}

pub fn disorder_kernels(spec: &CorrelatorSpec, p0: f64, t_max: f64, mode: KernelMode) -> Result<DisorderKernels> {
    spec.validate()?;
    if !(p0 > 0.0) || !(t_max >= 0.0) {
        return Err(Error::Domain(format!("need p0 > 0 and t_max >= 0 (got {p0}, {t_max})")));
    }
    Ok(DisorderKernels { spec: spec.clone(), p0, t_max, mode })
}

/// S(c,t) = ∫₀ᵗ(t−t′) sin(ct′) dt′ = t/c − sin(ct)/c².
fn s_kernel(c: f64, t: f64) -> f64 {
    let x = c * t;
    if x.abs() < 1e-3 {
        c * t.powi(3) / 6.0 - c.powi(3) * t.powi(5) / 120.0
    } else {
        t / c - x.sin() / (c * c)
    }
}

/// Kernel values on an (s, q) grid at one time, q-major.
struct KernelTable {
    fg: Vec<C64>,
    fu: Vec<C64>,
    fg0: Vec<C64>,
    fu0: Vec<C64>,
}

impl DisorderKernels {
    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || t > self.t_max * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("t = {t} outside [0, {}]", self.t_max)));
        }
        Ok(())
    }

    /// Trapezoid nodes in q′, resolving every conjugate length up to s_max.
    fn nodes(&self, t: f64, s_max: f64) -> Vec<(f64, f64)> {
        let (hbar, v) = (self.spec.hbar, self.spec.v);
        let q_cut = self.spec.q_cutoff();
        let extent = s_max.abs() + v * t + self.spec.correlation_extent();
        let h = (2.0 * PI * hbar / (1.25 * extent)).min(q_cut / 32.0);
        let n = (q_cut / h).ceil() as i64;
        let h = q_cut / n as f64;
        (-n..=n)
            .map(|k| {
                let q = k as f64 * h;
                (q, h * g_of_q(&self.spec, q))
            })
            .filter(|p| p.1 > 0.0)
            .collect()
    }

    fn bracket_g(&self, qp: f64, q: f64, t: f64) -> f64 {
        let (hbar, v, p0) = (self.spec.hbar, self.spec.v, self.p0);
        let a = sinc(v * t * (2.0 * p0 + q + qp) / (2.0 * hbar));
        let b = sinc(v * t * (2.0 * p0 - q + qp) / (2.0 * hbar));
        t * t / (2.0 * hbar * hbar) * (a * a + b * b)
    }

    fn bracket_u(&self, qp: f64, q: f64, t: f64) -> f64 {
        let (hbar, v, p0) = (self.spec.hbar, self.spec.v, self.p0);
        let a = v * (qp + 2.0 * p0) / hbar;
        let b = v * q / hbar;
        (s_kernel(a - b, t) - s_kernel(a + b, t)) / (hbar * hbar)
    }

    fn large_time_g(&self, s: f64, q: f64, t: f64) -> C64 {
        let (hbar, v, p0) = (self.spec.hbar, self.spec.v, self.p0);
        let pre = PI * t / (hbar * v);
        let k1 = 2.0 * p0 + q;
        let k2 = 2.0 * p0 - q;
        C64::from_polar(pre * g_of_q(&self.spec, k1), -k1 * s / hbar)
            + C64::from_polar(pre * g_of_q(&self.spec, k2), -k2 * s / hbar)
    }

    /// F̄_t^{(g)}(s,q).
    pub fn f_g(&self, s: f64, q: f64, t: f64) -> Result<C64> {
        self.check_time(t)?;
        if self.mode == KernelMode::LargeTime {
            return Ok(self.large_time_g(s, q, t));
        }
        Ok(self
            .nodes(t, s)
            .iter()
            .map(|&(qp, w)| C64::from_polar(w * self.bracket_g(qp, q, t), qp * s / self.spec.hbar))
            .sum())
    }

    /// F̄_t^{(u)}(s,q); real at s = 0.
    pub fn f_u(&self, s: f64, q: f64, t: f64) -> Result<C64> {
        self.check_time(t)?;
        Ok(self
            .nodes(t, s)
            .iter()
            .map(|&(qp, w)| C64::from_polar(w * self.bracket_u(qp, q, t), qp * s / self.spec.hbar))
            .sum())
    }

    fn table(&self, s_grid: &[f64], q_grid: &[f64], t: f64) -> KernelTable {
        let hbar = self.spec.hbar;
        let s_max = s_grid.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        let nodes = self.nodes(t, s_max);
        let ns = s_grid.len();
        let phases: Vec<C64> = s_grid
            .iter()
            .flat_map(|&s| nodes.iter().map(move |&(qp, _)| C64::from_polar(1.0, qp * s / hbar)))
            .collect();
        let rows: Vec<(Vec<C64>, Vec<C64>, C64, C64)> = q_grid
            .par_iter()
            .map(|&q| {
                let bg: Vec<f64> = nodes.iter().map(|&(qp, w)| w * self.bracket_g(qp, q, t)).collect();
                let bu: Vec<f64> = nodes.iter().map(|&(qp, w)| w * self.bracket_u(qp, q, t)).collect();
                let mut fg = Vec::with_capacity(ns);
                let mut fu = Vec::with_capacity(ns);
                for (is, &s) in s_grid.iter().enumerate() {
                    let ph = &phases[is * nodes.len()..(is + 1) * nodes.len()];
                    let u: C64 = ph.iter().zip(&bu).map(|(p, b)| p * b).sum();
                    let g: C64 = match self.mode {
                        KernelMode::Exact => ph.iter().zip(&bg).map(|(p, b)| p * b).sum(),
                        KernelMode::LargeTime => self.large_time_g(s, q, t),
                    };
                    fg.push(g);
                    fu.push(u);
                }
                let fg0 = match self.mode {
                    KernelMode::Exact => C64::new(bg.iter().sum(), 0.0),
                    KernelMode::LargeTime => self.large_time_g(0.0, q, t),
                };
                let fu0 = C64::new(bu.iter().sum(), 0.0);
                (fg, fu, fg0, fu0)
            })
            .collect();
        let mut out = KernelTable { fg: Vec::new(), fu: Vec::new(), fg0: Vec::new(), fu0: Vec::new() };
        for (fg, fu, g0, u0) in rows {
            out.fg.extend(fg);
            out.fu.extend(fu);
            out.fg0.push(g0);
            out.fu0.push(u0);
        }
        out
    }
}

/// Centred uniform grids for χ(s,q); both sizes odd so s = 0 and q = 0 are nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharGrid {
    pub n_s: usize,
    pub s_max: f64,
    pub n_q: usize,
    pub q_max: f64,
}

impl CharGrid {
    /// s ∈ [−16σ, 16σ], q ∈ [−8ħ/σ, 8ħ/σ], 513 points each.
    pub fn for_packet(sigma: f64, hbar: f64) -> Self {
        Self { n_s: 513, s_max: 16.0 * sigma, n_q: 513, q_max: 8.0 * hbar / sigma }
    }

    /// Only the q = 0 line, which is all the momentum distribution needs.
    pub fn momentum_line(sigma: f64) -> Self {
        Self { n_s: 513, s_max: 16.0 * sigma, n_q: 1, q_max: 0.0 }
    }

    fn axis(n: usize, max: f64) -> Vec<f64> {
        if n == 1 {
            return vec![0.0];
        }
        let h = 2.0 * max / (n - 1) as f64;
        let mid = (n - 1) / 2;
        (0..n).map(|k| (k as f64 - mid as f64) * h).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.n_s % 2 == 0 || self.n_q % 2 == 0 || !(self.s_max > 0.0) || (self.n_q > 1 && !(self.q_max > 0.0)) {
            return Err(Error::Config(format!(
                "characteristic grid needs odd sizes and positive extents (got {self:?})"
            )));
        }
        Ok(())
    }
}

/// Two-component characteristic function χ_t^±(s,q), q-major storage.
#[derive(Clone, Debug)]
pub struct CharacteristicSpinor {
    pub s_grid: Vec<f64>,
    pub q_grid: Vec<f64>,
    pub chi_plus: Vec<C64>,
    pub chi_minus: Vec<C64>,
    pub p0: f64,
    pub t: f64,
    pub hbar: f64,
}

impl CharacteristicSpinor {
    /// Right-moving Gaussian packet ψ₀ ∝ exp[−x²/4σ² + ip₀x/ħ]:
    /// χ₀ = exp[−s²/8σ² − q²σ²/2ħ² + ip₀s/ħ] in the upper component.
    pub fn gaussian_right_mover(p0: f64, sigma: f64, hbar: f64, grid: CharGrid) -> Result<Self> {
        grid.validate()?;
        if !(sigma > 0.0) || !(hbar > 0.0) {
            return Err(Error::Domain(format!("need sigma > 0 and hbar > 0 (got {sigma}, {hbar})")));
        }
        let s_grid = CharGrid::axis(grid.n_s, grid.s_max);
        let q_grid = CharGrid::axis(grid.n_q, grid.q_max);
        let mut chi_plus = Vec::with_capacity(s_grid.len() * q_grid.len());
        for &q in &q_grid {
            for &s in &s_grid {
                let amp = (-(s * s) / (8.0 * sigma * sigma) - (q * sigma / hbar).powi(2) / 2.0).exp();
                chi_plus.push(C64::from_polar(amp, p0 * s / hbar));
            }
        }
        let chi_minus = vec![C64::new(0.0, 0.0); chi_plus.len()];
        Ok(Self { s_grid, q_grid, chi_plus, chi_minus, p0, t: 0.0, hbar })
    }

    fn ns(&self) -> usize {
        self.s_grid.len()
    }

    fn centre(&self) -> usize {
        (self.q_grid.len() / 2) * self.ns() + self.ns() / 2
    }

    /// χ^+(0,0) + χ^−(0,0).
    pub fn norm_sum(&self) -> C64 {
        let c = self.centre();
        self.chi_plus[c] + self.chi_minus[c]
    }

    pub fn right_fraction(&self) -> f64 {
        self.chi_plus[self.centre()].re
    }

    /// max |χ(−s,−q) − χ(s,q)*| over both components.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.chi_plus.len();
        (0..n)
            .map(|i| {
                let j = n - 1 - i;
                (self.chi_plus[j] - self.chi_plus[i].conj())
                    .norm()
                    .max((self.chi_minus[j] - self.chi_minus[i].conj()).norm())
            })
            .fold(0.0, f64::max)
    }

    /// Tr ρ̄² = (1/2πħ)∫ds dq Σ_± χ^±(s,q)χ^±(−s,−q).
    pub fn purity(&self) -> Result<f64> {
        if self.q_grid.len() < 3 {
            return Err(Error::Config("purity needs a two-dimensional (s, q) grid".into()));
        }
        let ds = self.s_grid[1] - self.s_grid[0];
        let dq = self.q_grid[1] - self.q_grid[0];
        let n = self.chi_plus.len();
        let sum: C64 = (0..n)
            .map(|i| {
                let j = n - 1 - i;
                self.chi_plus[i] * self.chi_plus[j] + self.chi_minus[i] * self.chi_minus[j]
            })
            .sum();
        Ok(sum.re * ds * dq / (2.0 * PI * self.hbar))
    }
}

/// χ_t = exp[−F̄^g(0,q)𝟙 + F̄^g(s,q)σ_x − F̄^u(s,q)σ_y − i(vtq/ħ − F̄^u(0,q))σ_z] χ₀.
pub fn evolve_characteristic(chi0: &CharacteristicSpinor, kernels: &DisorderKernels, t: f64) -> Result<CharacteristicSpinor> {
    kernels.check_time(t)?;
    if (kernels.spec.hbar - chi0.hbar).abs() > 1e-15 * chi0.hbar {
        return Err(Error::Config("kernels and spinor use different ħ".into()));
    }
    let tab = kernels.table(&chi0.s_grid, &chi0.q_grid, t);
    let (hbar, v) = (kernels.spec.hbar, kernels.spec.v);
    let ns = chi0.ns();
    let mut out = chi0.clone();
    out.t = chi0.t + t;
    out.chi_plus
        .par_chunks_mut(ns)
        .zip(out.chi_minus.par_chunks_mut(ns))
        .enumerate()
        .for_each(|(iq, (cp, cm))| {
            let q = chi0.q_grid[iq];
            let a0 = -tab.fg0[iq];
            let bz = -I * (C64::new(v * t * q / hbar, 0.0) - tab.fu0[iq]);
            for is in 0..ns {
                let k = iq * ns + is;
                let m = pauli_exp(a0, [tab.fg[k], -tab.fu[k], bz]);
                let (p, mi) = (cp[is], cm[is]);
                cp[is] = m[0] * p + m[1] * mi;
                cm[is] = m[2] * p + m[3] * mi;
            }
        });
    Ok(out)
}

/// Band-resolved momentum distribution on an ascending p grid.
#[derive(Clone, Debug)]
pub struct MomentumDistribution {
    pub p: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    /// Largest imaginary residue of the transform (should be at roundoff).
    pub max_imag: f64,
}

impl MomentumDistribution {
    pub fn dp(&self) -> f64 {
        self.p[1] - self.p[0]
    }

    pub fn weight_plus(&self) -> f64 {
        self.plus.iter().sum::<f64>() * self.dp()
    }

    pub fn weight_minus(&self) -> f64 {
        self.minus.iter().sum::<f64>() * self.dp()
    }
}

/// P^±(p) = (1/2πħ)∫ds e^{−ips/ħ}χ^±(s,0) via FFT.
pub fn momentum_distribution(chi: &CharacteristicSpinor) -> Result<MomentumDistribution> {
    let ns = chi.ns();
    if ns < 3 {
        return Err(Error::Config("s grid too small".into()));
    }
    let ds = chi.s_grid[1] - chi.s_grid[0];
    if chi.s_grid.windows(2).any(|w| ((w[1] - w[0]) - ds).abs() > 1e-9 * ds) {
        return Err(Error::Config("momentum distribution needs a uniform s grid".into()));
    }
    let iq0 = chi.q_grid.len() / 2;
    if chi.q_grid[iq0].abs() > 0.0 {
        return Err(Error::Config("q grid must contain q = 0".into()));
    }
    let fft = FftPlanner::<f64>::new().plan_fft_forward(ns);
    let hbar = chi.hbar;
    let s0 = chi.s_grid[0];
    let freq = |j: usize| {
        let jj = if j <= ns / 2 { j as f64 } else { j as f64 - ns as f64 };
        2.0 * PI * hbar * jj / (ns as f64 * ds)
    };
    let mut order: Vec<usize> = (0..ns).collect();
    order.sort_by(|&a, &b| freq(a).total_cmp(&freq(b)));
    let mut max_imag: f64 = 0.0;
    let mut transform = |src: &[C64]| -> Vec<f64> {
        let mut buf = src.to_vec();
        fft.process(&mut buf);
        order
            .iter()
            .map(|&j| {
                let val = buf[j] * C64::from_polar(ds / (2.0 * PI * hbar), -freq(j) * s0 / hbar);
                max_imag = max_imag.max(val.im.abs());
                val.re
            })
            .collect()
    };
    let row = iq0 * ns..(iq0 + 1) * ns;
    let plus = transform(&chi.chi_plus[row.clone()]);
    let minus = transform(&chi.chi_minus[row]);
    let p = order.iter().map(|&j| freq(j)).collect();
    Ok(MomentumDistribution { p, plus, minus, max_imag })
}

/// Closed form ⟨x⟩(t) = ⟨x⟩₀ + (v − C₀/p₀²v)t + (C₀ħ/2v²p₀³) sin(2p₀vt/ħ).
pub fn mean_position(spec: &CorrelatorSpec, p0: f64, x0: f64, t: f64) -> f64 {
    let (c0, v, hbar) = (spec.c0, spec.v, spec.hbar);
    x0 + (v - c0 / (p0 * p0 * v)) * t + c0 * hbar / (2.0 * v * v * p0.powi(3)) * (2.0 * p0 * v * t / hbar).sin()
}

/// ⟨x⟩(t) = ⟨x⟩₀ + v∫₀ᵗ e^{−2F̄^g(0,0,t′)} dt′ from the kernels (right-moving start).
pub fn mean_position_from_kernels(kernels: &DisorderKernels, x0: f64, t: f64) -> Result<f64> {
    kernels.check_time(t)?;
    if t == 0.0 {
        return Ok(x0);
    }
    let v = kernels.spec.v;
    let period = PI * kernels.spec.hbar / (kernels.p0 * v);
    let panels = ((t / period).ceil() as usize * 2).max(4);
    let h = t / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        for (tp, w) in gauss_legendre_on(12, k as f64 * h, (k + 1) as f64 * h) {
            acc += w * (-2.0 * kernels.f_g(0.0, 0.0, tp)?.re).exp();
        }
    }
    Ok(x0 + v * acc)
}

/// Plateau r = 1 − (C₀/2v²p₀²)(1 − ℓ/√(ℓ² + 4σ²)) of the purity for vt ≫ ℓ, σ.
pub fn purity_plateau(spec: &CorrelatorSpec, p0: f64, sigma: f64) -> f64 {
    let l = spec.ell;
    1.0 - spec.c0 / (2.0 * spec.v * spec.v * p0 * p0) * (1.0 - l / (l * l + 4.0 * sigma * sigma).sqrt())
}

/// Uniform periodic position grid, N a power of two.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub length: f64,
    pub hbar: f64,
    pub v: f64,
}

impl GridSpec {
    pub fn new(n: usize, length: f64) -> Self {
        Self { n, length, hbar: 1.0, v: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < 4 {
            return Err(Error::Config(format!("grid size must be a power of two >= 4 (got {})", self.n)));
        }
        if !(self.length > 0.0) || !(self.hbar > 0.0) || !(self.v > 0.0) {
            return Err(Error::Config(format!("invalid grid {self:?}")));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// x_k = −L/2 + k·dx.
    pub fn x_grid(&self) -> Vec<f64> {
        (0..self.n).map(|k| -0.5 * self.length + k as f64 * self.dx()).collect()
    }

    /// Momenta in FFT order.
    pub fn p_grid(&self) -> Vec<f64> {
        let n = self.n;
        let dp = 2.0 * PI * self.hbar / self.length;
        (0..n)
            .map(|j| if j < n / 2 { j as f64 * dp } else { (j as f64 - n as f64) * dp })
            .collect()
    }
}

/// Gaussian random mass field m(x)v² with correlator C(x − x′), periodic on the grid.
///
/// White noise is filtered in Fourier space by √(G(p)·2πħ/L) so that
/// E[f(x)f(x′)] = Σ_p G(p)(2πħ/L)e^{ip(x−x′)/ħ} ≈ C(x − x′).
pub fn sample_mass_field(spec: &CorrelatorSpec, grid: &GridSpec, rng: &mut RngStream) -> Result<Vec<f64>> {
    spec.validate()?;
    grid.validate()?;
    let n = grid.n;
    if spec.c0 == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<C64> = (0..n).map(|_| C64::new(rng.standard_normal(), 0.0)).collect();
    fwd.process(&mut buf);
    let dp = 2.0 * PI * spec.hbar / grid.length;
    for (b, p) in buf.iter_mut().zip(grid.p_grid()) {
        *b *= (g_of_q(spec, p) * dp / n as f64).sqrt();
    }
    inv.process(&mut buf);
    Ok(buf.into_iter().map(|z| z.re).collect())
}

/// Two-component wavefunction on a periodic grid plus its mass field.
#[derive(Clone, Debug)]
pub struct GridState {
    pub grid: GridSpec,
    pub up: Vec<C64>,
    pub down: Vec<C64>,
    /// m(x)v² per site (energy).
    pub mass: Vec<f64>,
}

impl GridState {
    /// Normalised right-moving packet ψ↑ ∝ exp[−(x−x₀)²/4σ² + ip₀x/ħ].
    pub fn gaussian(grid: GridSpec, x0: f64, sigma: f64, p0: f64) -> Result<Self> {
        grid.validate()?;
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("sigma must be positive (got {sigma})")));
        }
        let up: Vec<C64> = grid
            .x_grid()
            .iter()
            .map(|&x| C64::from_polar((-(x - x0).powi(2) / (4.0 * sigma * sigma)).exp(), p0 * x / grid.hbar))
            .collect();
        let mut s = Self { grid, down: vec![C64::new(0.0, 0.0); grid.n], up, mass: vec![0.0; grid.n] };
        s.normalize();
        Ok(s)
    }

    pub fn with_mass(mut self, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != self.grid.n {
            return Err(Error::Dimension { expected: self.grid.n, got: mass.len() });
        }
        self.mass = mass;
        Ok(self)
    }

    fn normalize(&mut self) {
        let n = self.norm().sqrt();
        for z in self.up.iter_mut().chain(self.down.iter_mut()) {
            *z /= n;
        }
    }

    /// Σ|ψ|²dx.
    pub fn norm(&self) -> f64 {
        self.up.iter().chain(&self.down).map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn mean_position(&self) -> f64 {
        let dx = self.grid.dx();
        self.grid
            .x_grid()
            .iter()
            .enumerate()
            .map(|(k, &x)| x * (self.up[k].norm_sqr() + self.down[k].norm_sqr()))
            .sum::<f64>()
            * dx
    }

    /// ⟨ψ|φ⟩ = Σ(ψ↑*φ↑ + ψ↓*φ↓)dx.
    pub fn overlap(&self, other: &GridState) -> C64 {
        let s: C64 = self
            .up
            .iter()
            .zip(&other.up)
            .chain(self.down.iter().zip(&other.down))
            .map(|(a, b)| a.conj() * b)
            .sum();
        s * self.grid.dx()
    }

    /// Probability weights |ψ̃↑(p)|², |ψ̃↓(p)|² (FFT order, summing to the norm).
    pub fn momentum_weights(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid.n;
        let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
        let mut u = self.up.clone();
        let mut d = self.down.clone();
        fft.process(&mut u);
        fft.process(&mut d);
        let scale = self.grid.dx() / n as f64;
        (u.iter().map(|z| z.norm_sqr() * scale).collect(), d.iter().map(|z| z.norm_sqr() * scale).collect())
    }

    /// Weight in the left-moving band at negative momenta, Σ_{p<0}|ψ̃↓(p)|².
    pub fn backscattered_weight(&self) -> f64 {
        let (_, down) = self.momentum_weights();
        self.grid.p_grid().iter().zip(down).filter(|(p, _)| **p < 0.0).map(|(_, w)| w).sum()
    }

    /// Largest |p| carrying non-negligible weight (relative 1e-14 of the peak).
    pub fn momentum_support(&self) -> f64 {
        let (u, d) = self.momentum_weights();
        let peak = u.iter().chain(&d).cloned().fold(0.0, f64::max);
        self.grid
            .p_grid()
            .iter()
            .zip(u.iter().zip(&d))
            .filter(|(_, (a, b))| a.max(**b) > 1e-14 * peak)
            .map(|(p, _)| p.abs())
            .fold(0.0, f64::max)
    }
}

/// Observables recorded during split-step evolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSample {
    pub t: f64,
    pub norm: f64,
    pub x_mean: f64,
    pub backscatter: f64,
}

#[derive(Clone, Debug)]
pub struct GridTrajectory {
    pub samples: Vec<GridSample>,
    pub final_state: GridState,
}

struct SplitStep {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    half_up: Vec<C64>,
    half_down: Vec<C64>,
    cos_m: Vec<f64>,
    sin_m: Vec<f64>,
    n: usize,
}

impl SplitStep {
    fn new(state: &GridState, dt: f64) -> Self {
        let g = state.grid;
        let mut planner = FftPlanner::<f64>::new();
        let p = g.p_grid();
        let n = g.n;
        // FFT round trip multiplies by n; fold 1/n into the kinetic phase
        let half_up = p.iter().map(|&p| C64::from_polar(1.0 / n as f64, -g.v * p * dt / (2.0 * g.hbar))).collect();
        let half_down = p.iter().map(|&p| C64::from_polar(1.0 / n as f64, g.v * p * dt / (2.0 * g.hbar))).collect();
        let theta: Vec<f64> = state.mass.iter().map(|m| m * dt / g.hbar).collect();
        Self {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            half_up,
            half_down,
            cos_m: theta.iter().map(|t| t.cos()).collect(),
            sin_m: theta.iter().map(|t| t.sin()).collect(),
            n,
        }
    }

    fn kinetic(&self, up: &mut [C64], down: &mut [C64]) {
        self.fwd.process(up);
        self.fwd.process(down);
        for j in 0..self.n {
            up[j] *= self.half_up[j];
            down[j] *= self.half_down[j];
        }
        self.inv.process(up);
        self.inv.process(down);
    }

    fn mass(&self, up: &mut [C64], down: &mut [C64]) {
        // e^{−iθσ_x} = cos θ 𝟙 − i sin θ σ_x
        for k in 0..self.n {
            let (a, b) = (up[k], down[k]);
            up[k] = a * self.cos_m[k] - I * b * self.sin_m[k];
            down[k] = b * self.cos_m[k] - I * a * self.sin_m[k];
        }
    }

    fn step(&self, up: &mut [C64], down: &mut [C64]) {
        self.kinetic(up, down);
        self.mass(up, down);
        self.kinetic(up, down);
    }
}

/// Precondition: dx resolves the shortest carried wavelength with ≥ 8 points
/// and dt·max(v|p|, |m|v²)/ħ ≤ 0.1 over the populated momenta.
pub fn check_grid_resolution(state: &GridState, dt: f64) -> Result<()> {
    let g = state.grid;
    let p_max = state.momentum_support().max(f64::MIN_POSITIVE);
    let points = 2.0 * PI * g.hbar / p_max / g.dx();
    if points < 8.0 {
        return Err(Error::Config(format!(
            "grid resolves the shortest populated wavelength with {points:.1} points (need >= 8)"
        )));
    }
    let m_max = state.mass.iter().fold(0.0f64, |a, m| a.max(m.abs()));
    let cfl = dt * (g.v * p_max).max(m_max) / g.hbar;
    if !(dt > 0.0) || cfl > 0.1 {
        return Err(Error::Config(format!("time step too large: dt·max(v|p|, |m|v²)/ħ = {cfl:.3} > 0.1")));
    }
    Ok(())
}

/// Strang split-step evolution of one realization, sampling every `record_every` steps.
pub fn grid_evolve(state: &GridState, dt: f64, steps: usize, record_every: usize) -> Result<GridTrajectory> {
    state.grid.validate()?;
    if record_every == 0 {
        return Err(Error::Config("record_every must be >= 1".into()));
    }
    check_grid_resolution(state, dt)?;
    let stepper = SplitStep::new(state, dt);
    let mut cur = state.clone();
    let sample = |s: &GridState, t: f64| GridSample {
        t,
        norm: s.norm(),
        x_mean: s.mean_position(),
        backscatter: s.backscattered_weight(),
    };
    let mut samples = vec![sample(&cur, 0.0)];
    for n in 1..=steps {
        stepper.step(&mut cur.up, &mut cur.down);
        if n % record_every == 0 || n == steps {
            samples.push(sample(&cur, n as f64 * dt));
        }
    }
    Ok(GridTrajectory { samples, final_state: cur })
}

/// Settings for an ensemble of split-step realizations.
#[derive(Clone, Debug, PartialEq)]
pub struct GridEnsembleConfig {
    pub grid: GridSpec,
    pub x0: f64,
    pub sigma: f64,
    pub p0: f64,
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
    pub realizations: usize,
}

/// Ensemble means (and standard errors) of the grid observables.
#[derive(Clone, Debug)]
pub struct GridEnsembleResult {
    pub times: Vec<f64>,
    pub x_mean: Vec<f64>,
    pub x_mean_se: Vec<f64>,
    pub backscatter: Vec<f64>,
    pub backscatter_se: Vec<f64>,
    /// Largest |Σ|ψ|²dx − 1| over all realizations and samples.
    pub norm_drift: f64,
}

/// Average over `realizations` mass fields; realization k uses stream k.
pub fn grid_ensemble(spec: &CorrelatorSpec, cfg: &GridEnsembleConfig, rng: &RngStream) -> Result<GridEnsembleResult> {
    if cfg.realizations == 0 {
        return Err(Error::Config("need at least one realization".into()));
    }
    let base = GridState::gaussian(cfg.grid, cfg.x0, cfg.sigma, cfg.p0)?;
    let run = |k: usize| -> Result<Vec<GridSample>> {
        let mass = sample_mass_field(spec, &cfg.grid, &mut rng.substream(k as u64))?;
        let st = base.clone().with_mass(mass)?;
        Ok(grid_evolve(&st, cfg.dt, cfg.steps, cfg.record_every)?.samples)
    };
    // fixed chunks keep the reduction order independent of the thread count
    let chunk = 8;
    let chunks: Result<Vec<Vec<Vec<GridSample>>>> = (0..cfg.realizations.div_ceil(chunk))
        .into_par_iter()
        .map(|c| (c * chunk..((c + 1) * chunk).min(cfg.realizations)).map(run).collect())
        .collect();
    let all: Vec<Vec<GridSample>> = chunks?.into_iter().flatten().collect();
    let nt = all[0].len();
    let kf = all.len() as f64;
    let stat = |f: &dyn Fn(&GridSample) -> f64, i: usize| {
        let m = all.iter().map(|r| f(&r[i])).sum::<f64>() / kf;
        let var = if all.len() > 1 {
            all.iter().map(|r| (f(&r[i]) - m).powi(2)).sum::<f64>() / (kf - 1.0)
        } else {
            0.0
        };
        (m, (var / kf).sqrt())
    };
    let mut out = GridEnsembleResult {
        times: all[0].iter().map(|s| s.t).collect(),
        x_mean: Vec::with_capacity(nt),
        x_mean_se: Vec::with_capacity(nt),
        backscatter: Vec::with_capacity(nt),
        backscatter_se: Vec::with_capacity(nt),
        norm_drift: all.iter().flatten().map(|s| (s.norm - 1.0).abs()).fold(0.0, f64::max),
    };
    for i in 0..nt {
        let (m, se) = stat(&|s| s.x_mean, i);
        out.x_mean.push(m);
        out.x_mean_se.push(se);
        let (m, se) = stat(&|s| s.backscatter, i);
        out.backscatter.push(m);
        out.backscatter_se.push(se);
    }
    Ok(out)
}

/// Unbiased estimate of Tr ρ̄² from K pure realizations: mean of |⟨ψ_k|ψ_l⟩|² over k ≠ l.
pub fn ensemble_purity(states: &[GridState]) -> Result<f64> {
    let k = states.len();
    if k < 2 {
        return Err(Error::Config("ensemble purity needs at least two realizations".into()));
    }
    let sum: f64 = (0..k)
        .into_par_iter()
        .map(|a| ((a + 1)..k).map(|b| states[a].overlap(&states[b]).norm_sqr()).sum::<f64>())
        .sum();
    Ok(2.0 * sum / (k * (k - 1)) as f64)
}

/// Least-squares slope and intercept of y against x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trapz(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..=n).map(|k| {
            let w = if k == 0 || k == n { 0.5 } else { 1.0 };
            w * f(a + k as f64 * h)
        }).sum::<f64>() * h
    }

    #[test]
    fn g_at_zero_and_symmetry() {
        let spec = CorrelatorSpec { hbar: 0.7, ..CorrelatorSpec::gaussian(0.3, 1.7) };
        assert!((g_of_q(&spec, 0.0) - 0.3 * 1.7 / (2.0 * PI.sqrt() * 0.7)).abs() < 1e-15);
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100 {
            let q = 5.0 * rng.standard_normal();
            assert_eq!(g_of_q(&spec, q), g_of_q(&spec, -q));
        }
    }

    #[test]
    fn g_integrates_to_c0() {
        let spec = CorrelatorSpec::gaussian(0.42, 0.8);
        let q = spec.q_cutoff();
        let total = trapz(|p| g_of_q(&spec, p), -q, q, 4000);
        assert!((total / 0.42 - 1.0).abs() < 1e-6);
        let table = CorrelatorSpec {
            form: CorrelatorForm::Table(vec![(0.0, 2.0), (1.0, 1.0), (2.0, 0.0)]),
            ..CorrelatorSpec::gaussian(0.5, 1.0)
        };
        let total = trapz(|p| g_of_q(&table, p), -2.0, 2.0, 4000);
        assert!((total / 0.5 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn table_with_negative_entry_rejected() {
        let spec = CorrelatorSpec { form: CorrelatorForm::Table(vec![(0.0, 1.0), (1.0, -0.1)]), ..CorrelatorSpec::gaussian(1.0, 1.0) };
        assert!(spec.validate().is_err());
        assert!(disorder_kernels(&spec, 1.0, 1.0, KernelMode::Exact).is_err());
    }

    #[test]
    fn correlation_is_fourier_pair() {
        let spec = CorrelatorSpec { hbar: 1.3, ..CorrelatorSpec::gaussian(0.2, 1.1) };
        for x in [0.0, 0.5, 1.1, 2.0] {
            let q = spec.q_cutoff();
            let c = trapz(|p| g_of_q(&spec, p) * (p * x / 1.3).cos(), -q, q, 4000);
            assert!((c - spec.correlation(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn kernels_vanish_at_zero_time() {
        let k = disorder_kernels(&CorrelatorSpec::gaussian(0.1, 1.0), 1.0, 5.0, KernelMode::Exact).unwrap();
        for (s, q) in [(0.0, 0.0), (1.0, 0.3), (-2.0, 0.1)] {
            assert_eq!(k.f_g(s, q, 0.0).unwrap(), C64::new(0.0, 0.0));
            assert_eq!(k.f_u(s, q, 0.0).unwrap(), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn large_time_value_at_origin() {
        let spec = CorrelatorSpec::gaussian(0.1, 1.0);
        let k = disorder_kernels(&spec, 1.0, 50.0, KernelMode::LargeTime).unwrap();
        let t = 30.0;
        let want = 2.0 * PI * t * g_of_q(&spec, 2.0);
        assert!((k.f_g(0.0, 0.0, t).unwrap().re - want).abs() < 1e-15);
    }

    #[test]
    fn exact_kernel_matches_virtual_oscillation() {
        // p₀ ≫ ħ/ℓ and vt ≪ ℓ: F̄^g(0,0) ≈ (C₀/p₀²v²) sin²(p₀vt/ħ)
        let spec = CorrelatorSpec::gaussian(0.1, 40.0);
        let p0 = 4.0;
        let k = disorder_kernels(&spec, p0, 3.0, KernelMode::Exact).unwrap();
        for t in [0.2, 0.5, 1.0, 2.0, 3.0] {
            let got = k.f_g(0.0, 0.0, t).unwrap().re;
            let want = 0.1 / (p0 * p0) * (p0 * t).sin().powi(2);
            assert!((got - want).abs() < 2e-3 * 0.1 / (p0 * p0), "t = {t}: {got} vs {want}");
        }
    }

    #[test]
    fn exact_kernel_closed_form_for_gaussian() {
        // 2∫G(q′)(1 − cos((2p₀+q′)t))/(2p₀+q′)² computed independently
        let spec = CorrelatorSpec::gaussian(0.3, 1.5);
        let p0 = 1.2;
        let k = disorder_kernels(&spec, p0, 10.0, KernelMode::Exact).unwrap();
        for t in [0.7, 3.0, 9.0] {
            let want = trapz(
                |q| {
                    let c = 2.0 * p0 + q;
                    let x = c * t;
                    let f = if x.abs() < 1e-6 { t * t / 2.0 } else { (1.0 - x.cos()) / (c * c) };
                    2.0 * g_of_q(&spec, q) * f
                },
                -15.0,
                15.0,
                200_000,
            );
            let got = k.f_g(0.0, 0.0, t).unwrap();
            assert!((got.re - want).abs() < 1e-9 && got.im.abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn kernel_parities() {
        let k = disorder_kernels(&CorrelatorSpec::gaussian(0.2, 1.3), 1.5, 10.0, KernelMode::Exact).unwrap();
        let mut rng = RngStream::new(4, 0);
        for _ in 0..10 {
            let s = 3.0 * rng.standard_normal();
            let q = rng.standard_normal();
            let t = 10.0 * rng.uniform();
            assert!((k.f_g(s, q, t).unwrap() - k.f_g(s, -q, t).unwrap()).norm() < 1e-10);
            assert!((k.f_u(s, q, t).unwrap() + k.f_u(s, -q, t).unwrap()).norm() < 1e-10);
        }
        assert!(k.f_u(0.0, 0.7, 4.0).unwrap().im.abs() < 1e-15);
    }

    #[test]
    fn exact_and_large_time_agree_late() {
        let spec = CorrelatorSpec::gaussian(0.1, 1.0);
        let p0 = 1.0;
        let ex = disorder_kernels(&spec, p0, 60.0, KernelMode::Exact).unwrap();
        let lt = disorder_kernels(&spec, p0, 60.0, KernelMode::LargeTime).unwrap();
        for t in [20.0, 40.0, 60.0] {
            let a = ex.f_g(0.0, 0.0, t).unwrap().re;
            let b = lt.f_g(0.0, 0.0, t).unwrap().re;
            assert!((a - b).abs() <= 0.05 * a, "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn free_evolution_keeps_momentum_distribution() {
        let spec = CorrelatorSpec::gaussian(0.0, 1.0);
        let (p0, sigma) = (1.0, 4.0);
        let chi0 = CharacteristicSpinor::gaussian_right_mover(p0, sigma, 1.0, CharGrid::momentum_line(sigma)).unwrap();
        let k = disorder_kernels(&spec, p0, 10.0, KernelMode::Exact).unwrap();
        let chi = evolve_characteristic(&chi0, &k, 10.0).unwrap();
        let a = momentum_distribution(&chi0).unwrap();
        let b = momentum_distribution(&chi).unwrap();
        for (x, y) in a.plus.iter().zip(&b.plus) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(b.weight_minus().abs() < 1e-14);
    }

    #[test]
    fn gaussian_momentum_distribution() {
        let (p0, sigma, hbar) = (1.5, 3.0, 0.8);
        let chi = CharacteristicSpinor::gaussian_right_mover(p0, sigma, hbar, CharGrid::momentum_line(sigma)).unwrap();
        let md = momentum_distribution(&chi).unwrap();
        for (p, got) in md.p.iter().zip(&md.plus) {
            let want = (2.0 / PI).sqrt() * sigma / hbar * (-2.0 * sigma * sigma * (p - p0).powi(2) / (hbar * hbar)).exp();
            assert!((got - want).abs() < 1e-10, "p = {p}");
        }
        assert!(md.max_imag < 1e-10);
        assert!((md.weight_plus() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn right_mover_upper_component_and_norm() {
        let spec = CorrelatorSpec::gaussian(0.2, 1.0);
        let (p0, sigma) = (1.0, 2.0);
        let k = disorder_kernels(&spec, p0, 20.0, KernelMode::Exact).unwrap();
        let grid = CharGrid { n_s: 65, s_max: 32.0, n_q: 33, q_max: 4.0 };
        let chi0 = CharacteristicSpinor::gaussian_right_mover(p0, sigma, 1.0, grid).unwrap();
        for t in [1.0, 7.0, 20.0] {
            let chi = evolve_characteristic(&chi0, &k, t).unwrap();
            let f = k.f_g(0.0, 0.0, t).unwrap().re;
            assert!((chi.right_fraction() - 0.5 * (1.0 + (-2.0 * f).exp())).abs() < 1e-12);
            assert!((chi.norm_sum() - 1.0).norm() < 1e-10);
            assert!(chi.hermiticity_defect() < 1e-10);
        }
    }

    #[test]
    fn backscattered_weight_in_large_time_mode() {
        let spec = CorrelatorSpec::gaussian(0.001, 1.0);
        let (p0, sigma) = (1.0, 8.0);
        let k = disorder_kernels(&spec, p0, 20.0, KernelMode::LargeTime).unwrap();
        let chi0 = CharacteristicSpinor::gaussian_right_mover(p0, sigma, 1.0, CharGrid::momentum_line(sigma)).unwrap();
        let chi = evolve_characteristic(&chi0, &k, 20.0).unwrap();
        let md = momentum_distribution(&chi).unwrap();
        let want = 2.0 * PI * 20.0 * g_of_q(&spec, 2.0 * p0);
        assert!((md.weight_minus() / want - 1.0).abs() < 2e-2);
        // centred at −p₀
        let centre = md.p.iter().zip(&md.minus).map(|(p, w)| p * w).sum::<f64>() / md.minus.iter().sum::<f64>();
        assert!((centre + p0).abs() < 1e-3);
    }

    #[test]
    fn mean_position_values() {
        let free = CorrelatorSpec::gaussian(0.0, 1.0);
        assert!((mean_position(&free, 2.0, 0.5, 3.0) - 3.5).abs() < 1e-15);
        let spec = CorrelatorSpec::gaussian(0.04, 10.0);
        // drift 0.99 and amplitude 0.0025 at ħ = v = 1, p₀ = 2
        let t = PI / 8.0;
        assert!((mean_position(&spec, 2.0, 0.0, t) - (0.99 * t + 0.0025)).abs() < 1e-15);
    }

    #[test]
    fn mean_position_from_kernels_tracks_closed_form() {
        let spec = CorrelatorSpec::gaussian(0.16, 60.0);
        let p0 = 4.0;
        let k = disorder_kernels(&spec, p0, 3.0, KernelMode::Exact).unwrap();
        for t in [0.5, 1.3, 3.0] {
            let a = mean_position_from_kernels(&k, 0.0, t).unwrap();
            let b = mean_position(&spec, p0, 0.0, t);
            // closed form drops O(F²) terms and the slow decay of C(vt)
            let f = 0.16 / 16.0;
            assert!((a - b).abs() < 2.0 * f * f * t + 0.02 * f / (2.0 * p0), "t = {t}: {a} vs {b}");
        }
    }

    #[test]
    fn plateau_limits() {
        let spec = CorrelatorSpec::gaussian(0.2, 1.0);
        assert!((purity_plateau(&spec, 2.0, 1e-9) - 1.0).abs() < 1e-12);
        assert!((purity_plateau(&spec, 2.0, 1e9) - (1.0 - 0.2 / 8.0)).abs() < 1e-9);
    }

    #[test]
    fn mass_field_statistics() {
        let spec = CorrelatorSpec::gaussian(0.3, 2.0);
        let grid = GridSpec::new(256, 64.0);
        let n = 10_000;
        let lag = (2.0 / grid.dx()) as usize;
        let (mut s0, mut s00, mut sl, mut sl2) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..n {
            let f = sample_mass_field(&spec, &grid, &mut RngStream::new(5, k)).unwrap();
            s0 += f[10];
            s00 += f[10] * f[10];
            sl += f[10] * f[10 + lag];
            sl2 += (f[10] * f[10 + lag]).powi(2);
        }
        let nf = n as f64;
        assert!((s0 / nf).abs() < 4.0 * (0.3f64 / nf).sqrt());
        // Var(f²) = 2C₀² for a Gaussian variate
        assert!((s00 / nf - 0.3).abs() < 4.0 * 0.3 * (2.0 / nf).sqrt());
        let se = ((sl2 / nf - (sl / nf).powi(2)) / nf).sqrt();
        assert!((sl / nf - 0.3 * (-1.0f64).exp()).abs() < 4.0 * se);
        let zero = sample_mass_field(&CorrelatorSpec::gaussian(0.0, 1.0), &grid, &mut RngStream::new(0, 0)).unwrap();
        assert!(zero.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn massless_packet_translates() {
        let grid = GridSpec::new(1024, 128.0);
        let (sigma, p0, x0) = (3.0, 1.0, -20.0);
        let st = GridState::gaussian(grid, x0, sigma, p0).unwrap();
        let (dt, steps) = (0.02, 1500);
        let tr = grid_evolve(&st, dt, steps, 250).unwrap();
        let t = dt * steps as f64;
        let norm = 1.0 / (2.0 * PI * sigma * sigma).sqrt();
        for (k, x) in grid.x_grid().iter().enumerate() {
            let want = norm * (-(x - x0 - t).powi(2) / (2.0 * sigma * sigma)).exp();
            assert!((tr.final_state.up[k].norm_sqr() - want).abs() < 1e-8);
        }
        for s in &tr.samples {
            assert!((s.norm - 1.0).abs() < 1e-10);
            assert!(s.backscatter < 1e-20);
        }
    }

    #[test]
    fn constant_mass_dispersion() {
        let grid = GridSpec::new(64, 2.0 * PI * 8.0);
        let m0 = 0.6;
        let j = 4;
        let p = grid.p_grid()[j];
        let e = (p * p + m0 * m0).sqrt();
        // positive-energy eigenvector of p σ_z + m₀ σ_x
        let (cu, cd) = ((e + p).sqrt(), m0 / (e + p).sqrt());
        let nrm = (cu * cu + cd * cd).sqrt();
        let x = grid.x_grid();
        let mut st = GridState::gaussian(grid, 0.0, 1.0, 0.0).unwrap();
        st.up = x.iter().map(|&x| C64::from_polar(cu / nrm, p * x)).collect();
        st.down = x.iter().map(|&x| C64::from_polar(cd / nrm, p * x)).collect();
        st.normalize();
        let st = st.with_mass(vec![m0; 64]).unwrap();
        let period = 2.0 * PI / e;
        let steps = 4000;
        let tr = grid_evolve(&st, period / steps as f64, steps, steps).unwrap();
        for k in 0..64 {
            assert!((tr.final_state.up[k] - st.up[k]).norm() < 1e-6);
            assert!((tr.final_state.down[k] - st.down[k]).norm() < 1e-6);
        }
    }

    #[test]
    fn coarse_grid_rejected() {
        let st = GridState::gaussian(GridSpec::new(256, 512.0), 0.0, 8.0, 2.0).unwrap();
        assert!(matches!(grid_evolve(&st, 0.01, 1, 1), Err(Error::Config(_))));
        let st = GridState::gaussian(GridSpec::new(4096, 512.0), 0.0, 8.0, 2.0).unwrap();
        assert!(matches!(grid_evolve(&st, 0.5, 1, 1), Err(Error::Config(_))));
        assert!(GridSpec::new(1000, 10.0).validate().is_err());
    }

    #[test]
    fn grid_ensemble_is_deterministic_and_normalised() {
        let spec = CorrelatorSpec::gaussian(0.02, 1.0);
        let cfg = GridEnsembleConfig {
            grid: GridSpec::new(512, 128.0),
            x0: 0.0,
            sigma: 4.0,
            p0: 1.0,
            dt: 0.02,
            steps: 100,
            record_every: 50,
            realizations: 12,
        };
        let a = grid_ensemble(&spec, &cfg, &RngStream::new(3, 0)).unwrap();
        let b = grid_ensemble(&spec, &cfg, &RngStream::new(3, 0)).unwrap();
        assert_eq!(a.x_mean, b.x_mean);
        assert_eq!(a.backscatter, b.backscatter);
        assert!(a.norm_drift < 1e-10);
        assert_eq!(a.times, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn ensemble_purity_of_identical_states_is_one() {
        let st = GridState::gaussian(GridSpec::new(256, 64.0), 0.0, 3.0, 1.0).unwrap();
        assert!((ensemble_purity(&[st.clone(), st.clone(), st]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let y: Vec<f64> = x.iter().map(|x| 3.0 * x - 2.0).collect();
        let (a, b) = linear_fit(&x, &y);
        assert!((a - 3.0).abs() < 1e-14 && (b + 2.0).abs() < 1e-13);
    }
}
