//! Result tables and the per-run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::Format;
use super::ExperimentError;

/// A rectangular table of numbers with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Real(f64),
    Text(String),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            // shortest representation that round-trips
            Cell::Real(v) => write!(f, "{v:?}"),
            Cell::Text(v) => write!(f, "{v}"),
        }
    }
}

impl Table {
    pub fn new(name: &str, columns: &[&str], description: &str) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            description: description.to_string(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn schema(&self) -> String {
        self.columns.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.schema();
        s.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                write!(s, "{c}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| match c {
                        Cell::Int(v) => serde_json::json!(v),
                        Cell::Real(v) => serde_json::json!(v),
                        Cell::Text(v) => serde_json::json!(v),
                    })
                    .collect()
            })
            .collect();
        let doc = serde_json::json!({ "columns": self.columns, "rows": rows });
        serde_json::to_string_pretty(&doc).unwrap() + "\n"
    }

    pub fn file_name(&self, format: Format) -> String {
        match format {
            Format::Csv => format!("{}.csv", self.name),
            Format::Json => format!("{}.json", self.name),
        }
    }

    /// Column values, for tests and post-processing.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| match &r[idx] {
                    Cell::Int(v) => *v as f64,
                    Cell::Real(v) => *v,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }
}

/// A file produced by a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub file: String,
    pub schema: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub solver: String,
    pub config: String,
    pub artifacts: Vec<Artifact>,
}

/// Everything a run produced, kept in memory until written.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub solver: String,
    pub resolved_config: String,
    pub tables: Vec<Table>,
    /// Extra text files: (name, description, contents).
    pub files: Vec<(String, String, String)>,
}

pub const CONFIG_FILE: &str = "resolved.toml";
pub const MANIFEST_FILE: &str = "manifest.json";

impl RunOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn write(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>, ExperimentError> {
        fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
        let mut written = Vec::new();
        let mut artifacts = Vec::new();
        let mut put = |name: &str, contents: &str| -> Result<(), ExperimentError> {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| ExperimentError::io(&path, e))?;
            written.push(path);
            Ok(())
        };
        put(CONFIG_FILE, &self.resolved_config)?;
        for t in &self.tables {
            let name = t.file_name(format);
            let body = match format {
                Format::Csv => t.to_csv(),
                Format::Json => t.to_json(),
            };
            put(&name, &body)?;
            artifacts.push(Artifact {
                file: name,
                schema: t.schema(),
                description: t.description.clone(),
            });
        }
        for (name, description, body) in &self.files {
            put(name, body)?;
            artifacts.push(Artifact {
                file: name.clone(),
                schema: String::new(),
                description: description.clone(),
            });
        }
        let manifest = Manifest {
            solver: self.solver.clone(),
            config: CONFIG_FILE.to_string(),
            artifacts,
        };
        put(MANIFEST_FILE, &(serde_json::to_string_pretty(&manifest).unwrap() + "\n"))?;
        Ok(written)
    }
}
