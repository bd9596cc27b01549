//! Results tables and CSV emission.

use std::fmt;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // 17 significant digits round-trip every f64
            Cell::Num(v) => write!(f, "{v:.16e}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// One results-table row; `aux` is a standard error or a tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub value: Cell,
    pub aux: Cell,
    pub pass: Option<bool>,
}

impl Row {
    pub fn value(name: impl Into<String>, value: impl Into<Cell>) -> Self {
        Self {
            name: name.into(),
            value: value.into(),
            aux: Cell::Empty,
            pass: None,
        }
    }

    pub fn estimate(name: impl Into<String>, value: f64, std_error: f64) -> Self {
        Self {
            aux: Cell::Num(std_error),
            ..Self::value(name, value)
        }
    }

    pub fn check(name: impl Into<String>, value: f64, tolerance: f64, pass: bool) -> Self {
        Self {
            aux: Cell::Num(tolerance),
            pass: Some(pass),
            ..Self::value(name, value)
        }
    }
}

/// A CSV table written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_header(name: impl Into<String>, header: Vec<String>) -> Self {
        Self {
            name: name.into(),
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self, preamble: &[String]) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        for line in preamble {
            buf.extend_from_slice(format!("# {line}\n").as_bytes());
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(buf);
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.to_string())).map_err(io)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }
}

/// Everything a subcommand produces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub rows: Vec<Row>,
    /// `series_*.csv` and `invariant.csv`.
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn failed(&self) -> bool {
        self.rows.iter().any(|r| r.pass == Some(false))
    }

    pub fn push(&mut self, row: Row) {
        self.rows.push(row);
    }
}

pub struct RunReport {
    pub command: String,
    pub config_hash: String,
    pub outcome: Outcome,
}

/// SHA-256 of the canonical JSON form of the configuration.
pub fn config_hash(config: &serde_json::Value) -> String {
    let text = serde_json::to_string(config).expect("JSON values serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl RunReport {
    fn preamble(&self) -> Vec<String> {
        vec![format!("command: {}", self.command), format!("config_sha256: {}", self.config_hash)]
    }

    pub fn report_table(&self) -> Table {
        let mut t = Table::new("report", &["name", "value", "aux", "pass"]);
        for r in &self.outcome.rows {
            let pass = r.pass.map_or(Cell::Empty, Cell::Bool);
            t.push(vec![Cell::Text(r.name.clone()), r.value.clone(), r.aux.clone(), pass]);
        }
        t
    }

    /// Writes every table and `report.csv` into `dir`; returns written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        let mut written = Vec::new();
        let mut files = Vec::new();
        for t in &self.outcome.tables {
            let path = dir.join(t.file_name());
            std::fs::write(&path, t.to_csv(&self.preamble())?).map_err(io)?;
            files.push(t.file_name());
            written.push(path);
        }
        let mut preamble = self.preamble();
        if !files.is_empty() {
            preamble.push(format!("files: {}", files.join(" ")));
        }
        let path = dir.join("report.csv");
        std::fs::write(&path, self.report_table().to_csv(&preamble)?).map_err(io)?;
        written.push(path);
        Ok(written)
    }

    /// Human-readable summary for stdout.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for r in &self.outcome.rows {
            let value = match &r.value {
                Cell::Num(v) => format!("{v}"),
                other => other.to_string(),
            };
            let aux = match (&r.aux, r.pass) {
                (Cell::Num(a), None) => format!(" ± {a:.3e}"),
                (Cell::Num(a), Some(_)) => format!(" (tol {a:.3e})"),
                _ => String::new(),
            };
            let verdict = match r.pass {
                Some(true) => " [pass]",
                Some(false) => " [FAIL]",
                None => "",
            };
            out.push_str(&format!("{}: {value}{aux}{verdict}\n", r.name));
        }
        out
    }
}
