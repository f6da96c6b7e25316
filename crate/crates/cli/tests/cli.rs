// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use ddqe_cli::CsvTable;

fn ddqe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ddqe")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "scenario = \"central-spin\"\n[parameters]\nseed = 1\nrealizations = -1\n");
    let out = ddqe(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("realizations"));

    let cfg = write(dir.path(), "noseed.toml", "scenario = \"dirac\"\n[parameters]\np0 = 2.0\n");
    assert_eq!(ddqe(&["run", &cfg]).status.code(), Some(1));
    assert_eq!(ddqe(&["run", "/nonexistent/config.toml"]).status.code(), Some(1));
}

#[test]
fn disorder_free_dirac_has_no_backscattering() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "dirac.toml",
        "scenario = \"dirac\"\nemit_svg = true\n[parameters]\nseed = 5\nc0 = 0.0\nt_max = 4.0\nsnapshot_times = [0.0, 4.0]\nchar_points = 65\n",
    );
    let out = ddqe(&["run", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = CsvTable::parse_csv(&std::fs::read_to_string(dir.path().join("dirac.csv")).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 5);
    for b in table.column("backscatter_weight").unwrap() {
        assert!(b.abs() < 1e-10);
    }
    for r in table.column("purity").unwrap() {
        assert!((r - 1.0).abs() < 1e-10);
    }
    let x = table.column("x_mean").unwrap();
    assert!((x[4] - 4.0).abs() < 1e-12);
    let m = CsvTable::parse_csv(&std::fs::read_to_string(dir.path().join("dirac_momentum.csv")).unwrap()).unwrap();
    assert_eq!(m.columns, ["t", "p", "P_up", "P_down"]);
    assert!(dir.path().join("dirac_backscatter.svg").exists());
}

#[test]
fn dirac_with_grid_oracle_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "dirac.toml",
        "scenario = \"dirac\"\n[parameters]\nseed = 5\nc0 = 0.01\np0 = 1.0\nt_max = 2.0\nsnapshot_times = [2.0]\nchar_points = 33\nrealizations = 4\ngrid_points = 1024\nbox_length = 256.0\n",
    );
    let out = ddqe(&["run", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = CsvTable::parse_csv(&std::fs::read_to_string(dir.path().join("dirac.csv")).unwrap()).unwrap();
    assert!(table.columns.iter().any(|c| c == "backscatter_grid"));
    for n in table.column("chi_norm").unwrap() {
        assert!((n - 1.0).abs() < 1e-10);
    }
}

#[test]
fn central_spin_table_shape_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cs.toml",
        "scenario = \"central-spin\"\n[parameters]\nseed = 9\ncase = \"i\"\nrealizations = 50\nt_max = 2.0\ndt = 0.01\nrecord_every = 10\n",
    );
    assert!(ddqe(&["run", &cfg]).status.success());
    let csv = dir.path().join("central_spin.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,me_ax,me_ay,me_az,me_purity,mc_ax,mc_ay,mc_az,mc_purity,mc_se_ax,mc_se_ay,mc_se_az,validity"
    );
    assert!(lines.next().unwrap().starts_with("hbar/E,"));
    assert_eq!(lines.count(), 21);

    let svg = dir.path().join("p.svg");
    let out = ddqe(&["plot", csv.to_str().unwrap(), "--x", "t", "--y", "me_purity,mc_purity", "-o", svg.to_str().unwrap()]);
    assert!(out.status.success());
    let s = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(s.matches("<polyline").count(), 2);
    let out = ddqe(&["plot", csv.to_str().unwrap(), "--x", "t", "--y", "nope", "-o", svg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_thread_count_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_ddqe")).args(["validate", "--quick"]).env("DDQE_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
