//! Check outcomes, run reports and atomic file output.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

/// One CSV cell; floats print with 17 significant digits.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| io::Error::other(e.to_string()))
    }
}

/// Result of one subcommand on one config. Holds no timings, so its JSON is
/// reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: String,
    pub pass: bool,
    pub verdicts: BTreeMap<String, bool>,
    /// Full report of the underlying analysis.
    pub details: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl CheckOutcome {
    pub fn new(check: &str, verdicts: BTreeMap<String, bool>, details: serde_json::Value, table: Option<Table>) -> Self {
        Self {
            check: check.to_string(),
            pass: verdicts.values().all(|&v| v),
            verdicts,
            details,
            error: None,
            table,
        }
    }

    pub fn failed(check: &str, error: String) -> Self {
        Self {
            check: check.to_string(),
            pass: false,
            verdicts: BTreeMap::new(),
            details: serde_json::Value::Null,
            error: Some(error),
            table: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckTiming {
    pub check: String,
    pub pass: bool,
    pub wall_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Per-config summary with the timings kept out of the data files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: String,
    pub config_hash: String,
    pub tool_version: String,
    pub checks: Vec<CheckTiming>,
    pub pass: bool,
}

impl RunReport {
    pub fn new(config: &str, config_hash: String) -> Self {
        Self {
            config: config.to_string(),
            config_hash,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            checks: Vec::new(),
            pass: true,
        }
    }

    pub fn record(&mut self, outcome: &CheckOutcome, wall_seconds: f64) {
        self.pass &= outcome.pass;
        self.checks.push(CheckTiming {
            check: outcome.check.clone(),
            pass: outcome.pass,
            wall_seconds,
            error: outcome.error.clone(),
        });
    }
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = Path::new(&tmp);
    {
        let mut f = fs::File::create(tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// `<dir>/<check>.json` and, when present, `<dir>/<check>.csv`.
pub fn write_outcome(dir: &Path, outcome: &CheckOutcome) -> io::Result<()> {
    write_json(&dir.join(format!("{}.json", outcome.check)), outcome)?;
    if let Some(table) = &outcome.table {
        write_atomic(&dir.join(format!("{}.csv", outcome.check)), &table.to_csv()?)?;
    }
    Ok(())
}
