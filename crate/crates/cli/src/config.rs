// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! TOML run configurations.
//!
//! ```toml
//! scenario = "central-spin"
//! emit_svg = true
//!
//! [parameters]
//! seed = 42
//! case = "iii"
//! realizations = 1000
//! ```
//!
//! Unknown keys are rejected and every validation message names its key.

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: String,
    #[serde(default)]
    emit_svg: bool,
    #[serde(default)]
    parameters: toml::Table,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CentralSpinParameters {
    pub seed: u64,
    #[serde(default = "one")]
    pub omega: f64,
    /// Δ̄²; defaults to the case's (Δ_rms/ħω)² ħ²ω².
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_sq_mean: Option<f64>,
    #[serde(default = "default_case")]
    pub case: String,
    #[serde(default = "default_realizations")]
    pub realizations: i64,
    #[serde(default = "default_cs_t_max")]
    pub t_max: f64,
    #[serde(default = "default_cs_dt")]
    pub dt: f64,
    /// Output row spacing in integrator steps.
    #[serde(default = "default_record_every")]
    pub record_every: i64,
    /// "fixed" or "gaussian".
    #[serde(default = "default_delta_dist")]
    pub delta_dist: String,
    /// "lindblad" or "redfield".
    #[serde(default = "default_representation")]
    pub representation: String,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "default_cs_output")]
    pub output: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiracParameters {
    pub seed: u64,
    #[serde(default = "one")]
    pub p0: f64,
    #[serde(default = "default_c0")]
    pub c0: f64,
    #[serde(default = "one")]
    pub ell: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub v: f64,
    #[serde(default = "default_dirac_t_max")]
    pub t_max: f64,
    /// Row spacing of the time table.
    #[serde(default = "one")]
    pub dt: f64,
    /// Times at which P^±(p) is tabulated.
    #[serde(default = "default_snapshots")]
    pub snapshot_times: Vec<f64>,
    /// "exact" or "large-time".
    #[serde(default = "default_kernel_mode")]
    pub kernel_mode: String,
    /// Points per axis of the (s, q) grid (odd).
    #[serde(default = "default_char_points")]
    pub char_points: i64,
    /// Split-step realizations; 0 skips the grid oracle columns.
    #[serde(default)]
    pub realizations: i64,
    #[serde(default = "default_grid_points")]
    pub grid_points: i64,
    #[serde(default = "default_box_length")]
    pub box_length: f64,
    #[serde(default = "default_grid_dt")]
    pub grid_dt: f64,
    #[serde(default = "default_dirac_output")]
    pub output: String,
    #[serde(default = "default_momentum_output")]
    pub momentum_output: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateParameters {
    pub seed: u64,
    #[serde(default)]
    pub quick: bool,
    #[serde(default = "default_validate_output")]
    pub output: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scenario {
    CentralSpin(CentralSpinParameters),
    Dirac(DiracParameters),
    Validate(ValidateParameters),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub emit_svg: bool,
}

fn one() -> f64 {
    1.0
}
fn default_case() -> String {
    "iii".into()
}
fn default_realizations() -> i64 {
    1000
}
fn default_cs_t_max() -> f64 {
    12.0
}
fn default_cs_dt() -> f64 {
    0.01
}
fn default_record_every() -> i64 {
    2
}
fn default_delta_dist() -> String {
    "fixed".into()
}
fn default_representation() -> String {
    "lindblad".into()
}
fn default_cs_output() -> String {
    "central_spin.csv".into()
}
fn default_c0() -> f64 {
    0.001
}
fn default_sigma() -> f64 {
    8.0
}
fn default_dirac_t_max() -> f64 {
    20.0
}
fn default_snapshots() -> Vec<f64> {
    vec![0.0, 20.0]
}
fn default_kernel_mode() -> String {
    "exact".into()
}
fn default_char_points() -> i64 {
    257
}
fn default_grid_points() -> i64 {
    4096
}
fn default_box_length() -> f64 {
    512.0
}
fn default_grid_dt() -> f64 {
    0.025
}
fn default_dirac_output() -> String {
    "dirac.csv".into()
}
fn default_momentum_output() -> String {
    "dirac_momentum.csv".into()
}
fn default_validate_output() -> String {
    "validate.csv".into()
}

fn bad(key: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("parameters.{key}: {msg}"))
}

fn positive(key: &str, x: f64) -> CliResult<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("must be positive and finite (got {x})")))
    }
}

fn nonnegative(key: &str, x: f64) -> CliResult<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(bad(key, format!("must be nonnegative and finite (got {x})")))
    }
}

fn at_least(key: &str, x: i64, min: i64) -> CliResult<()> {
    if x >= min {
        Ok(())
    } else {
        Err(bad(key, format!("must be >= {min} (got {x})")))
    }
}

fn one_of(key: &str, x: &str, allowed: &[&str]) -> CliResult<()> {
    if allowed.contains(&x) {
        Ok(())
    } else {
        Err(bad(key, format!("must be one of {allowed:?} (got {x:?})")))
    }
}

fn multiple_of(key: &str, t: f64, dt: f64) -> CliResult<()> {
    let n = (t / dt).round();
    if (n * dt - t).abs() > 1e-9 * t.max(dt) {
        return Err(bad(key, format!("{t} is not a multiple of dt = {dt}")));
    }
    Ok(())
}

impl CentralSpinParameters {
    pub fn validate(&self) -> CliResult<()> {
        positive("omega", self.omega)?;
        if let Some(d) = self.delta_sq_mean {
            nonnegative("delta_sq_mean", d)?;
        }
        one_of("case", &self.case, &["i", "ii", "iii"])?;
        at_least("realizations", self.realizations, 1)?;
        positive("t_max", self.t_max)?;
        positive("dt", self.dt)?;
        multiple_of("t_max", self.t_max, self.dt)?;
        at_least("record_every", self.record_every, 1)?;
        one_of("delta_dist", &self.delta_dist, &["fixed", "gaussian"])?;
        one_of("representation", &self.representation, &["lindblad", "redfield"])?;
        positive("hbar", self.hbar)?;
        nonempty("output", &self.output)
    }
}

impl DiracParameters {
    pub fn validate(&self) -> CliResult<()> {
        positive("p0", self.p0)?;
        nonnegative("c0", self.c0)?;
        positive("ell", self.ell)?;
        positive("sigma", self.sigma)?;
        positive("hbar", self.hbar)?;
        positive("v", self.v)?;
        nonnegative("t_max", self.t_max)?;
        positive("dt", self.dt)?;
        multiple_of("t_max", self.t_max, self.dt)?;
        for &t in &self.snapshot_times {
            if !(0.0..=self.t_max).contains(&t) {
                return Err(bad("snapshot_times", format!("{t} outside [0, t_max = {}]", self.t_max)));
            }
        }
        one_of("kernel_mode", &self.kernel_mode, &["exact", "large-time"])?;
        at_least("char_points", self.char_points, 3)?;
        if self.char_points % 2 == 0 {
            return Err(bad("char_points", format!("must be odd (got {})", self.char_points)));
        }
        at_least("realizations", self.realizations, 0)?;
        at_least("grid_points", self.grid_points, 4)?;
        if !(self.grid_points as u64).is_power_of_two() {
            return Err(bad("grid_points", format!("must be a power of two (got {})", self.grid_points)));
        }
        positive("box_length", self.box_length)?;
        positive("grid_dt", self.grid_dt)?;
        if self.realizations > 0 {
            multiple_of("t_max", self.t_max, self.grid_dt)?;
            multiple_of("dt", self.dt, self.grid_dt)?;
        }
        nonempty("output", &self.output)?;
        nonempty("momentum_output", &self.momentum_output)
    }
}

fn nonempty(key: &str, s: &str) -> CliResult<()> {
    if s.trim().is_empty() {
        Err(bad(key, "must not be empty"))
    } else {
        Ok(())
    }
}

impl ValidateParameters {
    pub fn validate(&self) -> CliResult<()> {
        nonempty("output", &self.output)
    }
}

fn typed<T: serde::de::DeserializeOwned>(table: toml::Table) -> CliResult<T> {
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(format!("parameters: {}", e.message())))
}

/// Parse and validate a TOML run configuration.
pub fn parse_config(text: &str) -> CliResult<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;
    let scenario = match raw.scenario.as_str() {
        "central-spin" => {
            let p: CentralSpinParameters = typed(raw.parameters)?;
            p.validate()?;
            Scenario::CentralSpin(p)
        }
        "dirac" => {
            let p: DiracParameters = typed(raw.parameters)?;
            p.validate()?;
            Scenario::Dirac(p)
        }
        "validate" => {
            let p: ValidateParameters = typed(raw.parameters)?;
            p.validate()?;
            Scenario::Validate(p)
        }
        other => {
            return Err(CliError::Config(format!(
                "scenario: unknown scenario {other:?} (expected central-spin, dirac or validate)"
            )))
        }
    };
    Ok(RunConfig { scenario, emit_svg: raw.emit_svg })
}

impl RunConfig {
    pub fn scenario_name(&self) -> &'static str {
        match self.scenario {
            Scenario::CentralSpin(_) => "central-spin",
            Scenario::Dirac(_) => "dirac",
            Scenario::Validate(_) => "validate",
        }
    }

    /// Serialize back to TOML with every default written out.
    pub fn to_toml(&self) -> CliResult<String> {
        let value = match &self.scenario {
            Scenario::CentralSpin(p) => toml::Value::try_from(p),
            Scenario::Dirac(p) => toml::Value::try_from(p),
            Scenario::Validate(p) => toml::Value::try_from(p),
        }
        .map_err(|e| CliError::Internal(e.to_string()))?;
        let parameters = match value {
            toml::Value::Table(t) => t,
            _ => return Err(CliError::Internal("parameters did not serialize to a table".into())),
        };
        let raw = RawConfig { scenario: self.scenario_name().into(), emit_svg: self.emit_svg, parameters };
        toml::to_string(&raw).map_err(|e| CliError::Internal(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
scenario = "central-spin"
[parameters]
omega = 1.0
delta_sq_mean = 0.01
case = "iii"
realizations = 1000
seed = 42
"#;

    #[test]
    fn minimal_central_spin() {
        let cfg = parse_config(MINIMAL).unwrap();
        match cfg.scenario {
            Scenario::CentralSpin(p) => {
                assert_eq!(p.seed, 42);
                assert_eq!(p.delta_sq_mean, Some(0.01));
                assert_eq!(p.realizations, 1000);
            }
            _ => panic!("wrong scenario"),
        }
        assert!(!cfg.emit_svg);
    }

    #[test]
    fn negative_realizations_named() {
        let err = parse_config(&MINIMAL.replace("1000", "-1")).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("realizations"), "{err}");
    }

    #[test]
    fn missing_seed_rejected() {
        let err = parse_config(&MINIMAL.replace("seed = 42", "")).unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
    }

    #[test]
    fn unknown_keys_and_scenarios_rejected() {
        let err = parse_config(&format!("{MINIMAL}bogus = 1\n")).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
        let err = parse_config(&MINIMAL.replace("central-spin", "lattice")).unwrap_err();
        assert!(err.to_string().contains("scenario"), "{err}");
        let err = parse_config(&format!("colour = 1\n{MINIMAL}")).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn round_trip() {
        for text in [
            MINIMAL.to_string(),
            "scenario = \"dirac\"\nemit_svg = true\n[parameters]\nseed = 1\nc0 = 0.0\n".to_string(),
            "scenario = \"validate\"\n[parameters]\nseed = 3\nquick = true\n".to_string(),
        ] {
            let cfg = parse_config(&text).unwrap();
            assert_eq!(parse_config(&cfg.to_toml().unwrap()).unwrap(), cfg);
        }
    }

    #[test]
    fn dirac_checks() {
        let base = "scenario = \"dirac\"\n[parameters]\nseed = 1\n";
        assert!(parse_config(base).is_ok());
        for (extra, key) in [
            ("char_points = 256", "char_points"),
            ("snapshot_times = [30.0]", "snapshot_times"),
            ("grid_points = 1000", "grid_points"),
            ("c0 = -0.1", "c0"),
            ("t_max = 2.5", "t_max"),
        ] {
            let err = parse_config(&format!("{base}{extra}\n")).unwrap_err();
            assert!(err.to_string().contains(key), "{extra}: {err}");
        }
    }
}
