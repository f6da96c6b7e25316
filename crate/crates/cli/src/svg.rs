// Copyright 2026 The ddqe Authors
// SPDX-License-Identifier: Apache-2.0

//! Standalone SVG line plots.

use std::fmt::Write as _;

use crate::error::{CliError, CliResult};
use crate::table::CsvTable;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 60.0;

/// Dash patterns in series order; the first is solid.
const DASHES: [&str; 4] = ["", "8 5", "2 4", "10 4 2 4"];
const COLOURS: [&str; 4] = ["#1f3b73", "#b5402a", "#2a7a3b", "#6b3fa0"];

fn label(name: &str, unit: &str) -> String {
    if unit.is_empty() || unit == "1" {
        name.to_string()
    } else {
        format!("{name} [{unit}]")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Round tick spacing giving roughly five intervals.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi - lo > 1e-12 * hi.abs().max(1.0) {
        (lo, hi)
    } else {
        let pad = 0.5 * lo.abs().max(1.0);
        (lo - pad, hi + pad)
    }
}

/// Line plot of columns `ys` against column `x`.
pub fn emit_svg(table: &CsvTable, x: &str, ys: &[&str]) -> CliResult<String> {
    if table.rows.is_empty() {
        return Err(CliError::Config("cannot plot an empty table".into()));
    }
    if ys.is_empty() {
        return Err(CliError::Config("no series selected".into()));
    }
    let xs = table.column(x)?;
    let series: Vec<Vec<f64>> = ys.iter().map(|y| table.column(y)).collect::<CliResult<_>>()?;
    let (x0, x1) = range(xs.iter().copied());
    let (y0, y1) = range(series.iter().flatten().copied());
    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |v: f64| MARGIN_L + (v - x0) / (x1 - x0) * pw;
    let sy = |v: f64| MARGIN_T + (y1 - v) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in ticks(x0, x1) {
        let px = sx(t);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_T + ph,
            MARGIN_T + ph + 5.0,
            MARGIN_T + ph + 18.0,
            crate::table::format_number((t * 1e9).round() / 1e9)
        );
    }
    for t in ticks(y0, y1) {
        let py = sy(t);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{MARGIN_L}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_L - 5.0,
            MARGIN_L - 8.0,
            py + 4.0,
            crate::table::format_number((t * 1e9).round() / 1e9)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 15.0,
        escape(&label(x, table.unit(x)))
    );
    let ylab = if ys.len() == 1 { label(ys[0], table.unit(ys[0])) } else { label("value", table.unit(ys[0])) };
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0,
        escape(&ylab)
    );
    for (k, (name, ys)) in ys.iter().zip(&series).enumerate() {
        let pts: Vec<String> = xs.iter().zip(ys).map(|(&a, &b)| format!("{:.2},{:.2}", sx(a), sy(b))).collect();
        let colour = COLOURS[k % COLOURS.len()];
        let dash = DASHES[k % DASHES.len()];
        let dash_attr = if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) };
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash_attr} points="{}"/>"#,
            pts.join(" ")
        );
        let ly = MARGIN_T + 15.0 + 20.0 * k as f64;
        let lx = WIDTH - MARGIN_R + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="1.5"{dash_attr}/><text x="{}" y="{}">{}</text>"#,
            lx + 30.0,
            lx + 36.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}
