// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ddqe_cli::validate::run_all;
use ddqe_cli::{emit_svg, parse_config, run_scenario, CliError, CliResult, CsvTable, RunOptions};

/// Disorder-dressed quantum evolution scenarios.
#[derive(Parser, Debug)]
#[command(name = "ddqe", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the scenario described by a TOML config.
    Run {
        config: PathBuf,
        /// Sum ensemble realizations strictly in order.
        #[arg(long)]
        serial: bool,
    },
    /// Run the acceptance suites and print one line per criterion.
    Validate {
        /// Skip the slow grid-oracle ensembles.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 20260415)]
        seed: u64,
        /// Also write the pass/fail table here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render columns of a CSV table as an SVG line plot.
    Plot {
        table: PathBuf,
        #[arg(long)]
        x: String,
        /// Comma-separated y columns.
        #[arg(long, value_delimiter = ',')]
        y: Vec<String>,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn init_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var("DDQE_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("DDQE_THREADS must be a positive integer (got {v:?})")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    Ok(())
}

fn run(config: &Path, serial: bool) -> CliResult<()> {
    let text = std::fs::read_to_string(config).map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
    let cfg = parse_config(&text)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let out = run_scenario(&cfg, base, RunOptions { serial })?;
    for a in &out.artifacts {
        a.write()?;
        println!("wrote {}", a.path().display());
    }
    for line in &out.report {
        println!("{line}");
    }
    match out.failed {
        Some(msg) => Err(CliError::Validity(msg)),
        None => Ok(()),
    }
}

fn validate(quick: bool, seed: u64, output: Option<PathBuf>) -> CliResult<()> {
    let reports = run_all(quick, seed);
    for r in &reports {
        println!("{r}");
    }
    if let Some(path) = output {
        ddqe_cli::validate::report_table(&reports)?.write(&path)?;
    }
    let failed = reports.iter().filter(|r| r.failed()).count();
    if failed > 0 {
        return Err(CliError::Validity(format!("{failed} criteria failed")));
    }
    Ok(())
}

fn plot(table: &Path, x: &str, y: &[String], output: &Path) -> CliResult<()> {
    let text = std::fs::read_to_string(table).map_err(|e| CliError::Config(format!("{}: {e}", table.display())))?;
    let t = CsvTable::parse_csv(&text)?;
    let ys: Vec<&str> = y.iter().map(String::as_str).collect();
    let svg = emit_svg(&t, x, &ys)?;
    std::fs::write(output, svg).map_err(|e| CliError::io(output, e))?;
    println!("wrote {}", output.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let res = init_threads().and_then(|_| match cli.command {
        Command::Run { config, serial } => run(&config, serial),
        Command::Validate { quick, seed, output } => validate(quick, seed, output),
        Command::Plot { table, x, y, output } => plot(&table, &x, &y, &output),
    });
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ddqe: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
