// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario runners producing CSV tables (and optional SVG plots).

use std::path::{Path, PathBuf};

use ddqe_core::centralspin::{CentralSpinParams, Fig2Case};
use ddqe_core::dirac::{
    disorder_kernels, evolve_characteristic, grid_ensemble, mean_position_from_kernels, momentum_distribution,
    CharGrid, CharacteristicSpinor, CorrelatorSpec, GridEnsembleConfig, GridSpec, KernelMode,
};
use ddqe_core::{
    bloch_map, build_lindblad, build_redfield, integrate, mc_average_evolution, DeltaDistribution, Expectation,
    IntegratorSpec, KernelGrid, Reduction, RngStream,
};

use crate::config::{CentralSpinParameters, DiracParameters, RunConfig, Scenario, ValidateParameters};
use crate::error::{CliError, CliResult};
use crate::svg::emit_svg;
use crate::table::CsvTable;
use crate::validate;

/// A produced artifact and where it goes.
#[derive(Clone, Debug, PartialEq)]
pub enum Artifact {
    Table { path: PathBuf, table: CsvTable },
    Svg { path: PathBuf, svg: String },
}

impl Artifact {
    pub fn path(&self) -> &Path {
        match self {
            Artifact::Table { path, .. } | Artifact::Svg { path, .. } => path,
        }
    }

    pub fn write(&self) -> CliResult<()> {
        match self {
            Artifact::Table { path, table } => table.write(path),
            Artifact::Svg { path, svg } => {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                }
                std::fs::write(path, svg).map_err(|e| CliError::io(path, e))
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ScenarioOutput {
    pub artifacts: Vec<Artifact>,
    /// Set when a validation suite failed (exit code 2).
    pub failed: Option<String>,
    /// Human-readable lines for stdout.
    pub report: Vec<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Strictly ordered single-pass reductions.
    pub serial: bool,
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn svg_path(csv: &Path, suffix: &str) -> PathBuf {
    let stem = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "plot".into());
    csv.with_file_name(format!("{stem}_{suffix}.svg"))
}

/// Run a configuration; relative output paths resolve against `base`.
pub fn run_scenario(cfg: &RunConfig, base: &Path, opts: RunOptions) -> CliResult<ScenarioOutput> {
    match &cfg.scenario {
        Scenario::CentralSpin(p) => {
            let table = central_spin_table(p, opts)?;
            let path = resolve(base, &p.output);
            let mut artifacts = Vec::new();
            if cfg.emit_svg {
                let svg = emit_svg(&table, "t", &["me_purity", "mc_purity"])?;
                artifacts.push(Artifact::Svg { path: svg_path(&path, "purity"), svg });
            }
            let breach = table.column("validity")?.contains(&0.0);
            let mut report = vec![format!("central-spin case {}: {} rows", p.case, table.rows.len())];
            if breach {
                report.push("validity guard tripped; rows past the breach carry validity=0".into());
            }
            artifacts.insert(0, Artifact::Table { path, table });
            Ok(ScenarioOutput { artifacts, failed: None, report })
        }
        Scenario::Dirac(p) => {
            let (table, momentum) = dirac_tables(p)?;
            let path = resolve(base, &p.output);
            let mpath = resolve(base, &p.momentum_output);
            let mut artifacts = Vec::new();
            if cfg.emit_svg {
                artifacts.push(Artifact::Svg { path: svg_path(&path, "purity"), svg: emit_svg(&table, "t", &["purity"])? });
                let mut ys = vec!["backscatter_weight"];
                if p.realizations > 0 {
                    ys.push("backscatter_grid");
                }
                artifacts.push(Artifact::Svg { path: svg_path(&path, "backscatter"), svg: emit_svg(&table, "t", &ys)? });
            }
            let report = vec![format!("dirac: {} time rows, {} momentum rows", table.rows.len(), momentum.rows.len())];
            artifacts.insert(0, Artifact::Table { path, table });
            artifacts.insert(1, Artifact::Table { path: mpath, table: momentum });
            Ok(ScenarioOutput { artifacts, failed: None, report })
        }
        Scenario::Validate(p) => run_validate(p, base),
    }
}

fn run_validate(p: &ValidateParameters, base: &Path) -> CliResult<ScenarioOutput> {
    let reports = validate::run_all(p.quick, p.seed);
    let table = validate::report_table(&reports)?;
    let failed: Vec<String> = reports.iter().filter(|r| r.failed()).map(|r| format!("#{}", r.id)).collect();
    Ok(ScenarioOutput {
        artifacts: vec![Artifact::Table { path: resolve(base, &p.output), table }],
        failed: (!failed.is_empty()).then(|| format!("failed criteria: {}", failed.join(", "))),
        report: reports.iter().map(|r| r.to_string()).collect(),
    })
}

/// Columns: t, me_{ax,ay,az,purity}, mc_{ax,ay,az,purity}, mc_se_{ax,ay,az}, validity.
pub fn central_spin_table(p: &CentralSpinParameters, opts: RunOptions) -> CliResult<CsvTable> {
    let case = Fig2Case::parse(&p.case).ok_or_else(|| CliError::Config(format!("parameters.case: {:?}", p.case)))?;
    let rms = case.delta_rms_over_omega() * p.hbar * p.omega;
    let params = CentralSpinParams { omega: p.omega, delta_sq_mean: p.delta_sq_mean.unwrap_or(rms * rms), hbar: p.hbar };
    let dist = if p.delta_dist == "gaussian" { DeltaDistribution::Gaussian } else { DeltaDistribution::Fixed };
    let ens = params.ensemble(dist)?;
    let grid = KernelGrid::for_step(p.t_max, p.dt);
    let generator = if p.representation == "redfield" {
        build_redfield(&ens, grid, Expectation::ClosedForm)?
    } else {
        build_lindblad(&ens, grid, Expectation::ClosedForm)?
    };
    let rho0 = case.initial_state();
    let spec = IntegratorSpec { record_every: p.record_every as usize, ..IntegratorSpec::new(p.dt, p.t_max) };
    let me = integrate(&generator, &rho0, spec)?;
    let reduction = if opts.serial { Reduction::Serial } else { Reduction::Parallel };
    let mc = mc_average_evolution(&ens, &rho0, &me.times, p.realizations as usize, &RngStream::new(p.seed, 0), reduction)?;

    let mut table = CsvTable::new(&[
        ("t", "hbar/E"),
        ("me_ax", "1"),
        ("me_ay", "1"),
        ("me_az", "1"),
        ("me_purity", "1"),
        ("mc_ax", "1"),
        ("mc_ay", "1"),
        ("mc_az", "1"),
        ("mc_purity", "1"),
        ("mc_se_ax", "1"),
        ("mc_se_ay", "1"),
        ("mc_se_az", "1"),
        ("validity", "1"),
    ]);
    for i in 0..me.len() {
        let t = me.times[i];
        let a = bloch_map(&me.states[i])?.as_array();
        let b = bloch_map(&mc.states[i])?.as_array();
        let se = mc.stderr[i];
        let valid = me.breach_time.is_none_or(|tb| t < tb);
        table.push(vec![
            t,
            a[0],
            a[1],
            a[2],
            me.states[i].purity(),
            b[0],
            b[1],
            b[2],
            mc.states[i].purity(),
            se[0],
            se[1],
            se[2],
            if valid { 1.0 } else { 0.0 },
        ])?;
    }
    Ok(table)
}

fn correlator(p: &DiracParameters) -> CorrelatorSpec {
    CorrelatorSpec { hbar: p.hbar, v: p.v, ..CorrelatorSpec::gaussian(p.c0, p.ell) }
}

fn time_axis(t_max: f64, dt: f64) -> Vec<f64> {
    let n = (t_max / dt).round() as usize;
    (0..=n).map(|k| k as f64 * dt).collect()
}

/// Time table (t, x_mean, purity, backscatter_weight, chi_norm [, grid columns])
/// and the long-format momentum table (t, p, P_up, P_down).
pub fn dirac_tables(p: &DiracParameters) -> CliResult<(CsvTable, CsvTable)> {
    let spec = correlator(p);
    let mode = if p.kernel_mode == "large-time" { KernelMode::LargeTime } else { KernelMode::Exact };
    let kernels = disorder_kernels(&spec, p.p0, p.t_max, mode)?;
    let n = p.char_points as usize;
    let grid = CharGrid { n_s: n, s_max: 16.0 * p.sigma, n_q: n, q_max: 8.0 * p.hbar / p.sigma };
    let chi0 = CharacteristicSpinor::gaussian_right_mover(p.p0, p.sigma, p.hbar, grid)?;
    let times = time_axis(p.t_max, p.dt);

    let oracle = if p.realizations > 0 {
        let cfg = GridEnsembleConfig {
            grid: GridSpec { n: p.grid_points as usize, length: p.box_length, hbar: p.hbar, v: p.v },
            x0: 0.0,
            sigma: p.sigma,
            p0: p.p0,
            dt: p.grid_dt,
            steps: (p.t_max / p.grid_dt).round() as usize,
            record_every: (p.dt / p.grid_dt).round() as usize,
            realizations: p.realizations as usize,
        };
        let r = grid_ensemble(&spec, &cfg, &RngStream::new(p.seed, 1))?;
        if r.norm_drift > 1e-10 {
            return Err(CliError::Validity(format!("grid norm drift {:e}", r.norm_drift)));
        }
        Some(r)
    } else {
        None
    };

    let mut cols = vec![("t", "hbar/E"), ("x_mean", "length"), ("purity", "1"), ("backscatter_weight", "1"), ("chi_norm", "1")];
    if oracle.is_some() {
        cols.extend([
            ("x_mean_grid", "length"),
            ("x_mean_grid_se", "length"),
            ("backscatter_grid", "1"),
            ("backscatter_grid_se", "1"),
        ]);
    }
    let mut table = CsvTable::new(&cols);
    for (i, &t) in times.iter().enumerate() {
        let chi = evolve_characteristic(&chi0, &kernels, t)?;
        let norm = chi.norm_sum();
        if (norm - 1.0).norm() > 1e-10 {
            return Err(CliError::Validity(format!("characteristic normalization {norm} at t = {t}")));
        }
        let md = momentum_distribution(&chi)?;
        let mut row = vec![t, mean_position_from_kernels(&kernels, 0.0, t)?, chi.purity()?, md.weight_minus(), norm.re];
        if let Some(r) = &oracle {
            row.extend([r.x_mean[i], r.x_mean_se[i], r.backscatter[i], r.backscatter_se[i]]);
        }
        table.push(row)?;
    }

    let line = CharacteristicSpinor::gaussian_right_mover(p.p0, p.sigma, p.hbar, CharGrid::momentum_line(p.sigma))?;
    let mut momentum = CsvTable::new(&[("t", "hbar/E"), ("p", "momentum"), ("P_up", "1/momentum"), ("P_down", "1/momentum")]);
    for &t in &p.snapshot_times {
        let md = momentum_distribution(&evolve_characteristic(&line, &kernels, t)?)?;
        for k in 0..md.p.len() {
            momentum.push(vec![t, md.p[k], md.plus[k], md.minus[k]])?;
        }
    }
    Ok((table, momentum))
}
