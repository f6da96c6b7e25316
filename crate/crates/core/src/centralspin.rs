// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Isotropically disordered central spin H = ħωσ_z + (Δ/2)Wσ_zW†.
//!
//! Closed forms for the Haar average, the effective Hamiltonian, the compact
//! Lindblad equation and its exact solution. The effective-Hamiltonian
//! coefficient is +Δ̄²t²sinc²(ωt)/6ħ², which is what the general second-order
//! generator produces for this ensemble.

use crate::ensemble::{
    mc_average_evolution, CentralSpinEnsembleSpec, DeltaDistribution, HamiltonianEnsemble,
    Reduction, Source, TrajectoryRecord,
};
use crate::error::{Error, Result};
use crate::qcore::linalg::{
    c, commutator, identity, lindblad_term, proj_down, proj_up, real, sigma_minus, sigma_plus,
    sigma_z, trace, ComplexMatrix, C64, I,
};
use crate::qcore::rng::RngStream;
use crate::qcore::state::{qubit_state, DensityMatrix};
use crate::qcore::Units;

/// Unnormalised sinc, sin(x)/x with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// ∫dμ(W) W X₁ W† X₂ W X₃ W† over the Haar measure on U(d).
pub fn weingarten_haar_integral(
    x1: &ComplexMatrix,
    x2: &ComplexMatrix,
    x3: &ComplexMatrix,
    d: usize,
) -> Result<ComplexMatrix> {
    for x in [x1, x2, x3] {
        if x.nrows() != d || x.ncols() != d {
            return Err(Error::Dimension { expected: d, got: x.nrows() });
        }
    }
    if d == 0 {
        return Err(Error::Domain("dimension must be >= 1".into()));
    }
    if d == 1 {
        return Ok(x1 * x2 * x3);
    }
    let df = d as f64;
    let norm = df * (df * df - 1.0);
    let t13 = trace(&(x1 * x3));
    let (t1, t3) = (trace(x1), trace(x3));
    let c1 = (t13 * df - t1 * t3) / norm;
    let c2 = (t1 * t3 * df - t13) / norm;
    Ok(identity(d) * (c1 * trace(x2)) + x2 * c2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CentralSpinParams {
    pub omega: f64,
    pub delta_sq_mean: f64,
    pub hbar: f64,
}

impl CentralSpinParams {
    pub fn new(omega: f64, delta_sq_mean: f64) -> Self {
        Self { omega, delta_sq_mean, hbar: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() || !(self.delta_sq_mean >= 0.0) || !(self.hbar > 0.0) {
            return Err(Error::Domain(format!("invalid central-spin parameters {self:?}")));
        }
        Ok(())
    }

    pub fn units(&self) -> Units {
        Units { hbar: self.hbar }
    }

    /// Matching ensemble with the given p_Δ.
    pub fn ensemble(&self, delta_dist: DeltaDistribution) -> Result<HamiltonianEnsemble> {
        let spec = CentralSpinEnsembleSpec { omega: self.omega, delta_sq_mean: self.delta_sq_mean, delta_dist };
        HamiltonianEnsemble::central_spin(spec, self.units())
    }
}

/// H_eff(t) = ħωσ_z(1 + Δ̄²t²sinc²(ωt)/6ħ²).
pub fn h_eff_central(p: &CentralSpinParams, t: f64) -> ComplexMatrix {
    let s = sinc(p.omega * t);
    let factor = 1.0 + p.delta_sq_mean * t * t * s * s / (6.0 * p.hbar * p.hbar);
    sigma_z() * real(p.hbar * p.omega * factor)
}

/// Right-hand side of the compact central-spin Lindblad equation.
pub fn me_rhs_central(p: &CentralSpinParams, t: f64, rho: &ComplexMatrix) -> ComplexMatrix {
    let h = h_eff_central(p, t);
    let rate = p.delta_sq_mean * t / (3.0 * p.hbar * p.hbar);
    let flip = sinc(2.0 * p.omega * t);
    let mut out = commutator(&h, rho) * (-I / p.hbar);
    let dephase = lindblad_term(&proj_up(), rho) + lindblad_term(&proj_down(), rho);
    let spinflip = lindblad_term(&sigma_plus(), rho) + lindblad_term(&sigma_minus(), rho);
    out += (dephase + spinflip * real(flip)) * real(rate);
    out
}

/// Exact solution of the compact equation for a given initial state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CentralSpinSolution {
    pub params: CentralSpinParams,
    pub rho_uu0: f64,
    pub rho_ud0: C64,
}

impl CentralSpinSolution {
    /// ρ̄_↑↑(t).
    pub fn rho_uu(&self, t: f64) -> f64 {
        let p = &self.params;
        let s = sinc(p.omega * t);
        let decay = (-p.delta_sq_mean * t * t * s * s / (3.0 * p.hbar * p.hbar)).exp();
        0.5 + (self.rho_uu0 - 0.5) * decay
    }

    /// ρ̄_↑↓(t).
    pub fn rho_ud(&self, t: f64) -> C64 {
        let p = &self.params;
        let h2 = p.hbar * p.hbar;
        let x = p.omega * t;
        // (1 − sinc 2ωt)/ω, continued through ω = 0
        let g = if x.abs() < 1e-4 {
            t * x * (2.0 / 3.0 - 2.0 * x * x / 15.0)
        } else {
            (1.0 - sinc(2.0 * x)) / p.omega
        };
        let s = sinc(x);
        let phase = -2.0 * x - p.delta_sq_mean * t * g / (6.0 * h2);
        let decay = (-p.delta_sq_mean * t * t * (1.0 + s * s) / (6.0 * h2)).exp();
        self.rho_ud0 * C64::from_polar(decay, phase)
    }

    pub fn matrix(&self, t: f64) -> ComplexMatrix {
        let uu = self.rho_uu(t);
        let ud = self.rho_ud(t);
        ComplexMatrix::from_row_slice(2, 2, &[real(uu), ud, ud.conj(), real(1.0 - uu)])
    }

    pub fn state(&self, t: f64) -> DensityMatrix {
        DensityMatrix::from_matrix_unchecked(self.matrix(t))
    }

    pub fn trajectory(&self, times: &[f64]) -> TrajectoryRecord {
        TrajectoryRecord {
            times: times.to_vec(),
            states: times.iter().map(|&t| self.state(t)).collect(),
            stderr: Vec::new(),
            source: Source::Me,
            breach_time: None,
        }
    }
}

pub fn exact_solution(p: &CentralSpinParams, rho0: &DensityMatrix) -> Result<CentralSpinSolution> {
    p.validate()?;
    if rho0.dim() != 2 {
        return Err(Error::Dimension { expected: 2, got: rho0.dim() });
    }
    let m = rho0.matrix();
    Ok(CentralSpinSolution { params: *p, rho_uu0: m[(0, 0)].re, rho_ud0: m[(0, 1)] })
}

/// The three disorder strengths / initial states of the purity figure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fig2Case {
    I,
    II,
    III,
}

impl Fig2Case {
    pub const ALL: [Fig2Case; 3] = [Fig2Case::I, Fig2Case::II, Fig2Case::III];

    /// √Δ̄² in units of ħω.
    pub fn delta_rms_over_omega(self) -> f64 {
        match self {
            Fig2Case::I => 0.05,
            Fig2Case::II => 0.1,
            Fig2Case::III => 0.2,
        }
    }

    pub fn initial_state(self) -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (up, down) = match self {
            Fig2Case::I => (s, s),
            Fig2Case::II => ((std::f64::consts::PI / 12.0).sin(), (std::f64::consts::PI / 12.0).cos()),
            Fig2Case::III => (0.0, 1.0),
        };
        qubit_state(c(up, 0.0), c(down, 0.0)).expect("normalised amplitudes")
    }

    pub fn label(self) -> &'static str {
        match self {
            Fig2Case::I => "i",
            Fig2Case::II => "ii",
            Fig2Case::III => "iii",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "i" => Some(Fig2Case::I),
            "ii" => Some(Fig2Case::II),
            "iii" => Some(Fig2Case::III),
            _ => None,
        }
    }
}

/// Scenario settings; [`Fig2Config::new`] gives the published grid ωt ∈ [0, 12].
#[derive(Clone, Debug, PartialEq)]
pub struct Fig2Config {
    pub case: Fig2Case,
    pub omega: f64,
    pub hbar: f64,
    /// Overrides the case's Δ̄² when set.
    pub delta_sq_mean: Option<f64>,
    pub delta_dist: DeltaDistribution,
    pub realizations: usize,
    pub times: Vec<f64>,
    pub reduction: Reduction,
}

impl Fig2Config {
    pub fn new(case: Fig2Case) -> Self {
        let omega = 1.0;
        let n = 600;
        let times = (0..n).map(|i| 12.0 / omega * i as f64 / (n - 1) as f64).collect();
        Self {
            case,
            omega,
            hbar: 1.0,
            delta_sq_mean: None,
            delta_dist: DeltaDistribution::Fixed,
            realizations: 1000,
            times,
            reduction: Reduction::Parallel,
        }
    }

    pub fn params(&self) -> CentralSpinParams {
        let rms = self.case.delta_rms_over_omega() * self.hbar * self.omega;
        CentralSpinParams {
            omega: self.omega,
            delta_sq_mean: self.delta_sq_mean.unwrap_or(rms * rms),
            hbar: self.hbar,
        }
    }
}

/// Closed-form master-equation trajectory and Monte-Carlo trajectory on a shared grid.
#[derive(Clone, Debug)]
pub struct Fig2Result {
    pub params: CentralSpinParams,
    pub me: TrajectoryRecord,
    pub mc: TrajectoryRecord,
}

pub fn run_fig2_scenario(cfg: &Fig2Config, rng: &RngStream) -> Result<Fig2Result> {
    let p = cfg.params();
    let rho0 = cfg.case.initial_state();
    let me = exact_solution(&p, &rho0)?.trajectory(&cfg.times);
    let ens = p.ensemble(cfg.delta_dist.clone())?;
    let mc = mc_average_evolution(&ens, &rho0, &cfg.times, cfg.realizations, rng, cfg.reduction)?;
    Ok(Fig2Result { params: p, me, mc })
}
