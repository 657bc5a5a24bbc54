//! CSV tables and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use qnpu_core::{Error, Result};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
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

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Versions {
    pub qnpu_lab: &'static str,
    pub qnpu_core: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            qnpu_lab: env!("CARGO_PKG_VERSION"),
            qnpu_core: qnpu_core::VERSION,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub config_path: String,
    /// Verbatim configuration text.
    pub config: String,
    pub versions: Versions,
    pub threads: usize,
    pub wall_time_s: f64,
    pub csv: String,
    pub summary: serde_json::Value,
}

/// Writes `<experiment>.csv` and `<experiment>.manifest.json` into `dir`.
pub fn write_outputs(dir: &Path, table: &Table, manifest: &Manifest) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(&manifest.csv);
    let manifest_path = dir.join(format!("{}.manifest.json", manifest.experiment));
    fs::write(&csv_path, table.to_csv()?)?;
    let json = serde_json::to_string_pretty(manifest).map_err(|e| Error::InvalidArgument(format!("manifest: {e}")))?;
    fs::write(&manifest_path, json + "\n")?;
    Ok((csv_path, manifest_path))
}
