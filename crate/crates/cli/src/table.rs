// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Rectangular numeric tables written as CSV: a header row, a units row, then data.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub units: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Shortest round-trip decimal; exponent form outside [1e-5, 1e16).
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".into()
    } else if (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl CsvTable {
    pub fn new(columns: &[(&str, &str)]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.0.to_string()).collect(),
            units: columns.iter().map(|c| c.1.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> CliResult<()> {
        if row.len() != self.columns.len() {
            return Err(CliError::Internal(format!(
                "row has {} entries, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        if let Some(i) = row.iter().position(|x| !x.is_finite()) {
            return Err(CliError::Validity(format!("non-finite value in column {}", self.columns[i])));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> CliResult<Vec<f64>> {
        let i = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Config(format!("column {name:?} not in table ({})", self.columns.join(", "))))?;
        Ok(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn unit(&self, name: &str) -> &str {
        self.columns.iter().position(|c| c == name).map(|i| self.units[i].as_str()).unwrap_or("")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(&self.columns.join(","));
        s.push('\n');
        s.push_str(&self.units.join(","));
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|&x| format_number(x)).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn parse_csv(text: &str) -> CliResult<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| CliError::Config("empty CSV".into()))?;
        let units = lines.next().ok_or_else(|| CliError::Config("CSV lacks a units row".into()))?;
        let columns: Vec<String> = header.split(',').map(str::to_string).collect();
        let units: Vec<String> = units.split(',').map(str::to_string).collect();
        if units.len() != columns.len() {
            return Err(CliError::Config("units row does not match the header".into()));
        }
        let mut table = Self { columns, units, rows: Vec::new() };
        for (n, line) in lines.enumerate() {
            let row: Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| CliError::Config(format!("CSV data row {}: {e}", n + 1)))?;
            table.push(row).map_err(|e| CliError::Config(format!("CSV data row {}: {e}", n + 1)))?;
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(path, self.to_csv()).map_err(|e| CliError::io(path, e))
    }
}
