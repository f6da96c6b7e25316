// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Library half of the `ddqe` command: configuration, scenario runners,
//! CSV/SVG output and the validation suites.

pub mod config;
pub mod error;
pub mod scenario;
pub mod svg;
pub mod table;
pub mod validate;

pub use config::{parse_config, RunConfig, Scenario};
pub use error::{CliError, CliResult};
pub use scenario::{run_scenario, Artifact, RunOptions, ScenarioOutput};
pub use svg::emit_svg;
pub use table::CsvTable;
