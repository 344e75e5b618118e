// Copyright 2026 The dqs Authors
// SPDX-License-Identifier: Apache-2.0

//! Result tables and their CSV/JSON renderings.
//!
//! CSV files start with `#` metadata lines (tool version, command, SHA-256 of
//! the config bytes, seed if any, then scalar summary entries), followed by a
//! header row. Floats are written as `{:.16e}`, i.e. 17 significant digits, so
//! identical inputs give byte-identical files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::OutputFormat;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    Float(f64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(k) => k.to_string(),
            Cell::Float(x) => format_float(*x),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(k: usize) -> Self {
        Cell::Int(k as u64)
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Everything one command produces.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub table: Table,
    /// Scalar results; `BTreeMap` keeps the key order stable.
    pub summary: BTreeMap<String, Value>,
}

impl Report {
    pub fn new(command: &str, table: Table) -> Self {
        Self {
            command: command.to_string(),
            table,
            summary: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.summary.insert(key.to_string(), value.into());
        self
    }
}

/// Provenance stamped into every file.
#[derive(Debug, Clone)]
pub struct Stamp {
    pub config_sha256: String,
    pub seed: Option<u64>,
}

impl Stamp {
    pub fn new(config_bytes: &[u8], seed: Option<u64>) -> Self {
        Self {
            config_sha256: hex::encode(Sha256::digest(config_bytes)),
            seed,
        }
    }
}

pub fn render_csv(report: &Report, stamp: &Stamp) -> Result<String, CliError> {
    let mut out = String::new();
    out.push_str(&format!("# dqs {}\n", dqs_core::VERSION));
    out.push_str(&format!("# command: {}\n", report.command));
    out.push_str(&format!("# config_sha256: {}\n", stamp.config_sha256));
    if let Some(seed) = stamp.seed {
        out.push_str(&format!("# seed: {seed}\n"));
    }
    for (k, v) in &report.summary {
        out.push_str(&format!("# {k}: {}\n", render_value(v)));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(&report.table.columns).map_err(io)?;
    for row in &report.table.rows {
        w.write_record(row.iter().map(Cell::render)).map_err(io)?;
    }
    let body = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    out.push_str(&String::from_utf8(body).map_err(|e| CliError::Output(e.to_string()))?);
    Ok(out)
}

fn render_value(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format_float(x),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn render_json(report: &Report, stamp: &Stamp) -> Result<String, CliError> {
    let doc = serde_json::json!({
        "version": dqs_core::VERSION,
        "command": report.command,
        "config_sha256": stamp.config_sha256,
        "seed": stamp.seed,
        "summary": report.summary,
        "columns": report.table.columns,
        "rows": report.table.rows,
    });
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Writes `<stem>.csv` and/or `<stem>.json` into `dir`, creating it if needed.
pub fn write(
    report: &Report,
    stamp: &Stamp,
    dir: &Path,
    stem: &str,
    format: OutputFormat,
) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut emit = |ext: &str, text: String| -> Result<(), CliError> {
        let path = dir.join(format!("{stem}.{ext}"));
        std::fs::write(&path, text).map_err(|e| CliError::Output(format!("{}: {e}", path.display())))?;
        written.push(path);
        Ok(())
    };
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        emit("csv", render_csv(report, stamp)?)?;
    }
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        emit("json", render_json(report, stamp)?)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut t = Table::new(&["n", "x"]);
        t.push(vec![0usize.into(), 0.1.into()]);
        t.push(vec![1usize.into(), (-2.5e-17).into()]);
        Report::new("demo", t).with("mean", 1.0 / 3.0).with("flag", true)
    }

    #[test]
    fn floats_carry_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(1.0 / 3.0), "3.3333333333333331e-1");
        for x in [0.1, 1.0 / 3.0, 6.02e23, -2.5e-17, f64::MIN_POSITIVE] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let stamp = Stamp::new(b"{}", Some(7));
        let text = render_csv(&sample(), &stamp).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# dqs "));
        assert_eq!(lines[1], "# command: demo");
        assert_eq!(
            lines[2],
            "# config_sha256: 44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a"
        );
        assert_eq!(lines[3], "# seed: 7");
        assert_eq!(lines[4], "# flag: true");
        assert_eq!(lines[5], "# mean: 3.3333333333333331e-1");
        assert_eq!(lines[6], "n,x");
        assert_eq!(lines[7], "0,1.0000000000000001e-1");
        assert_eq!(lines[8], "1,-2.4999999999999999e-17");
    }

    #[test]
    fn json_round_trips() {
        let stamp = Stamp::new(b"{}", None);
        let v: Value = serde_json::from_str(&render_json(&sample(), &stamp).unwrap()).unwrap();
        assert_eq!(v["command"], "demo");
        assert_eq!(v["rows"][1][1].as_f64(), Some(-2.5e-17));
        assert_eq!(v["summary"]["mean"].as_f64(), Some(1.0 / 3.0));
        assert!(v["seed"].is_null());
    }
}
