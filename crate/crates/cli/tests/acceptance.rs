// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Each test prints one PASS/FAIL line straight to stdout so
//! the lines show up in a plain `cargo test` run.

use std::io::Write;
use std::process::Command;
use std::time::Instant;

use ddqe_cli::validate::{run_criterion, CriterionReport, Status};

const SEED: u64 = 20260415;

fn announce(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "\nacceptance {line}");
    let _ = out.flush();
}

fn check(id: u32, limit_s: f64) {
    let r = run_criterion(id, SEED);
    announce(&r.to_string());
    assert!(r.passed(), "criterion {id} failed: {r}");
    if r.seconds > limit_s {
        announce(&format!("note: #{id} took {:.1} s (budget {limit_s} s)", r.seconds));
    }
}

#[test]
fn representation_identity() {
    check(1, 10.0);
}

#[test]
fn commuting_dephasing_exactness() {
    check(2, 5.0);
}

#[test]
fn central_spin_closed_form() {
    check(3, 10.0);
}

#[test]
fn central_spin_master_equation_vs_monte_carlo() {
    check(4, 60.0);
}

#[test]
fn error_order_scaling() {
    check(5, 180.0);
}

#[test]
fn weingarten_vs_haar_sampling() {
    check(6, 30.0);
}

#[test]
fn dirac_backscattering() {
    check(7, 300.0);
}

#[test]
fn zitterbewegung() {
    check(8, 300.0);
}

#[test]
fn normalization_and_positivity() {
    check(9, 30.0);
}

const CONFIG: &str = r#"
scenario = "central-spin"
emit_svg = true

[parameters]
seed = 42
case = "iii"
delta_dist = "gaussian"
realizations = 500
t_max = 8.0
dt = 0.01
record_every = 4
output = "out/central_spin.csv"
"#;

#[test]
fn determinism_of_cli_runs() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, CONFIG).unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let status = Command::new(env!("CARGO_BIN_EXE_ddqe"))
            .args(["run", cfg.to_str().unwrap(), "--serial"])
            .env("DDQE_THREADS", threads)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        let csv = std::fs::read(dir.path().join("out/central_spin.csv")).unwrap();
        let svg = std::fs::read(dir.path().join("out/central_spin_purity.svg")).unwrap();
        outputs.push((csv, svg));
    }
    let same = outputs[0] == outputs[1];
    let r = CriterionReport {
        id: 10,
        name: "determinism",
        status: if same { Status::Pass } else { Status::Fail },
        metric: if same { 0.0 } else { 1.0 },
        threshold: 0.0,
        detail: format!("two `ddqe run --serial` invocations, {} CSV bytes, byte-identical: {same}", outputs[0].0.len()),
        seconds: start.elapsed().as_secs_f64(),
    };
    announce(&r.to_string());
    assert!(same);
}
