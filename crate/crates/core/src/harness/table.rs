use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::config::{ExperimentConfig, Format};
use super::HarnessError;

/// Provenance attached to every table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    /// The config with defaults filled in.
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub code_version: String,
    /// Not covered by the byte-for-byte re-run guarantee.
    pub wall_clock_seconds: f64,
}

/// Numeric experiment output with fixed column headers.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Metadata,
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    metadata: Metadata,
    columns: Vec<String>,
    rows: Vec<Map<String, Value>>,
}

impl ResultTable {
    pub fn new(columns: &[&str], metadata: Metadata) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            metadata,
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    fn check(&self) -> Result<(), HarnessError> {
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.columns.len() {
                return Err(HarnessError::Table(format!(
                    "row {i} has {} values for {} columns",
                    row.len(),
                    self.columns.len()
                )));
            }
            if let Some(j) = row.iter().position(|x| !x.is_finite()) {
                return Err(HarnessError::Table(format!(
                    "row {i}, column {}: non-finite value {}",
                    self.columns[j], row[j]
                )));
            }
        }
        Ok(())
    }

    /// Header line plus one line per row, `.` decimals, shortest round-trip digits.
    pub fn to_csv(&self) -> Result<String, HarnessError> {
        self.check()?;
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{x}").expect("write to string");
            }
            out.push('\n');
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        self.check()?;
        let rows = self
            .rows
            .iter()
            .map(|row| {
                self.columns
                    .iter()
                    .zip(row)
                    .map(|(c, &x)| (c.clone(), Value::from(x)))
                    .collect()
            })
            .collect();
        let doc = JsonTable {
            metadata: self.metadata.clone(),
            columns: self.columns.clone(),
            rows,
        };
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| HarnessError::Table(e.to_string()))?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let doc: JsonTable = serde_json::from_str(text).map_err(|e| HarnessError::Table(e.to_string()))?;
        let mut rows = Vec::with_capacity(doc.rows.len());
        for (i, obj) in doc.rows.iter().enumerate() {
            let row = doc
                .columns
                .iter()
                .map(|c| {
                    obj.get(c)
                        .and_then(Value::as_f64)
                        .ok_or_else(|| HarnessError::Table(format!("row {i} lacks numeric `{c}`")))
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(row);
        }
        Ok(Self {
            columns: doc.columns,
            rows,
            metadata: doc.metadata,
        })
    }
}

/// Sidecar holding the metadata of a CSV table: `<path>.meta.json`.
pub fn metadata_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `table` to `path`. CSV output gets its metadata in a sidecar file
/// next to it (see [`metadata_path`]).
pub fn emit(table: &ResultTable, path: &Path, format: Format) -> Result<(), HarnessError> {
    match format {
        Format::Csv => {
            let csv = table.to_csv()?;
            let mut meta =
                serde_json::to_string_pretty(&table.metadata).map_err(|e| HarnessError::Table(e.to_string()))?;
            meta.push('\n');
            write(path, &csv)?;
            write(&metadata_path(path), &meta)
        }
        Format::Json => write(path, &table.to_json()?),
    }
}
