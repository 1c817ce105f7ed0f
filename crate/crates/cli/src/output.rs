//! Tables, JSON results and run manifests written under `--out`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Cell {
    /// Floats always carry 17 significant digits so replays match byte for byte.
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(v) => json!(v.to_string()),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
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

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Builds a row from heterogeneous values.
#[macro_export]
macro_rules! row {
    ($($v:expr),* $(,)?) => { vec![$($crate::output::Cell::from($v)),*] };
}

pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

pub mod schema {
    pub const CHAIN: &[&str] = &["n", "chain", "gap", "n_times_gap", "tau_eps", "eps"];
    pub const CIRCUIT: &[&str] = &["n", "k", "gate_source", "length", "metric", "value", "stderr", "seed"];
    pub const DESIGN: &[&str] = &["n", "k", "length_or_size", "metric", "value", "stderr"];
    pub const TPE: &[&str] = &["N", "k", "method", "lambda_A", "lambda_C", "p", "lambda_Q", "bound_rhs", "bound_satisfied"];
    pub const BOUND: &[&str] = &["experiment", "params", "bound", "empirical_freq", "samples", "seed"];
    pub const TRIALS: &[&str] = &["trial", "success", "queries_forward", "queries_adjoint", "distance_d", "distance_dplus"];
    pub const TESTING: &[&str] = &["trial", "instance", "verdict", "correct", "distance_d", "shots_per_generator", "queries_forward", "queries_adjoint"];
    pub const SELFTEST: &[&str] = &["check", "passed", "value", "tolerance"];
}

/// Records every file written by one run, then emits the manifest.
pub struct Sink {
    dir: PathBuf,
    format: Format,
    subcommand: &'static str,
    params: Value,
    seed: u64,
    written: Vec<String>,
}

impl Sink {
    pub fn new(dir: &Path, format: Format, subcommand: &'static str, params: Value, seed: u64) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Sink {
            dir: dir.to_path_buf(),
            format,
            subcommand,
            params,
            seed,
            written: Vec::new(),
        })
    }

    fn path(&mut self, ext: &str) -> PathBuf {
        let p = self.dir.join(format!("{}.{ext}", self.subcommand.replace('-', "_")));
        self.written.push(p.display().to_string());
        p
    }

    pub fn table(&mut self, table: &Table) -> Result<(), CliError> {
        match self.format {
            Format::Csv => {
                let path = self.path("csv");
                let mut w = csv::Writer::from_path(&path)?;
                w.write_record(table.header)?;
                for row in &table.rows {
                    w.write_record(row.iter().map(Cell::render))?;
                }
                w.flush()?;
            }
            Format::Json => {
                let rows: Vec<Value> = table
                    .rows
                    .iter()
                    .map(|r| Value::Object(table.header.iter().zip(r).map(|(h, c)| (h.to_string(), c.to_json())).collect()))
                    .collect();
                let path = self.path("json");
                fs::write(path, serde_json::to_string_pretty(&rows)? + "\n")?;
            }
        }
        Ok(())
    }

    pub fn format(&self) -> Format {
        self.format
    }

    /// Structured result, always JSON.
    pub fn result<T: Serialize>(&mut self, value: &T) -> Result<(), CliError> {
        let path = self.path("json");
        fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
        Ok(())
    }

    pub fn finish(self) -> Result<Vec<String>, CliError> {
        let manifest = RunManifest {
            subcommand: self.subcommand,
            params: self.params,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION"),
            outputs: self.written.clone(),
        };
        let path = self.dir.join(format!("{}.manifest.json", self.subcommand.replace('-', "_")));
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        let mut all = self.written;
        all.push(path.display().to_string());
        Ok(all)
    }
}

#[derive(Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub params: Value,
    pub seed: u64,
    pub version: &'static str,
    pub outputs: Vec<String>,
}
