use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Format, Settings};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
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

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl Cell {
    /// Shortest round-trip decimal for floats, so output is stable across runs.
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(v) => (*v).into(),
            Cell::Float(v) => (*v).into(),
            Cell::Text(s) => s.clone().into(),
            Cell::Bool(b) => (*b).into(),
        }
    }
}

/// Rectangular result table with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Self { name: name.to_string(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Numeric column by header name.
    pub fn column(&self, header: &str) -> Option<Vec<f64>> {
        let j = self.headers.iter().position(|h| h == header)?;
        self.rows
            .iter()
            .map(|r| match &r[j] {
                Cell::Float(v) => Some(*v),
                Cell::Int(v) => Some(*v as f64),
                _ => None,
            })
            .collect()
    }

    fn check(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.headers.len() {
                bail!("{}: row {i} has {} cells for {} columns", self.name, row.len(), self.headers.len());
            }
            if row.iter().any(|c| matches!(c, Cell::Float(v) if !v.is_finite())) {
                bail!("{}: row {i} contains a non-finite value", self.name);
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        Ok(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        let rows: Vec<Vec<serde_json::Value>> = self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect();
        let doc = serde_json::json!({ "columns": self.headers, "rows": rows });
        let mut out = serde_json::to_vec_pretty(&doc)?;
        out.push(b'\n');
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub config: Settings,
    pub seed: u64,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputFile>,
    pub excluded_trajectories: usize,
}

pub const MANIFEST_NAME: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Collects the files written by one command and the manifest describing them.
pub struct Run {
    command: String,
    settings: Settings,
    started: String,
    outputs: Vec<OutputFile>,
    excluded: usize,
}

impl Run {
    pub fn start(command: &str, settings: Settings) -> Result<Self> {
        fs::create_dir_all(&settings.out)
            .with_context(|| format!("creating output directory {}", settings.out.display()))?;
        Ok(Self { command: command.to_string(), settings, started: now(), outputs: Vec::new(), excluded: 0 })
    }

    pub fn settings(&self) -> &Settings {
        &self.settings
    }

    pub fn dir(&self) -> &Path {
        &self.settings.out
    }

    pub fn add_excluded(&mut self, n: usize) {
        self.excluded += n;
    }

    fn write_bytes(&mut self, file_name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.settings.out.join(file_name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(OutputFile { path: file_name.to_string(), sha256: sha256_hex(bytes) });
        Ok(path)
    }

    /// Writes the table as `<name>.csv` or `<name>.json`.
    pub fn write_table(&mut self, table: &Table) -> Result<PathBuf> {
        table.check()?;
        match self.settings.format {
            Format::Csv => {
                let bytes = table.to_csv()?;
                self.write_bytes(&format!("{}.csv", table.name), &bytes)
            }
            Format::Json => {
                let bytes = table.to_json()?;
                self.write_bytes(&format!("{}.json", table.name), &bytes)
            }
        }
    }

    /// Writes an SVG unless plotting is disabled.
    pub fn write_plot(&mut self, name: &str, svg: impl FnOnce() -> String) -> Result<()> {
        if self.settings.plot {
            let doc = svg();
            self.write_bytes(&format!("{name}.svg"), doc.as_bytes())?;
        }
        Ok(())
    }

    pub fn finish(self) -> Result<Manifest> {
        let manifest = Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: self.command,
            seed: self.settings.seed,
            config: self.settings,
            started: self.started,
            finished: now(),
            outputs: self.outputs,
            excluded_trajectories: self.excluded,
        };
        let path = manifest.config.out.join(MANIFEST_NAME);
        let mut text = serde_json::to_vec_pretty(&manifest)?;
        text.push(b'\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(manifest)
    }
}
