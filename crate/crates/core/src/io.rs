//! Tables, CSV/JSON writers and run manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Bumped whenever a column set or its order changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const SIMULATE_COLUMNS: [&str; 8] = ["t", "re_c", "im_c", "re_d", "im_d", "abs_c_sq", "w", "norm"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::param("format", format!("expected csv or json, got {s:?}"))),
        }
    }
}

/// Column names plus row-major numeric data.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Table { columns: columns.iter().map(|c| c.as_ref().to_owned()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(&mut out, *v);
            }
            out.push('\n');
        }
        out
    }

    /// `{"manifest": …, "columns": […], "rows": [[…]]}`; non-finite values become `null`.
    pub fn to_json(&self, manifest: &Value) -> Value {
        let rows: Vec<Vec<Value>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&v| if v.is_finite() { json!(v) } else { Value::Null }).collect())
            .collect();
        json!({ "manifest": manifest, "columns": self.columns, "rows": rows })
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// 17 significant digits; every non-finite value is written as `NaN`.
fn write_value(out: &mut String, v: f64) {
    if v.is_finite() {
        write!(out, "{v:.16e}").unwrap();
    } else {
        out.push_str("NaN");
    }
}

pub fn format_value(v: f64) -> String {
    let mut s = String::new();
    write_value(&mut s, v);
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub schema_version: u32,
    pub command: String,
    /// Fully resolved inputs, including defaults.
    pub params: Value,
    pub notes: Vec<String>,
    /// SHA-256 of the canonical JSON of everything above.
    pub config_digest: String,
    pub wall_clock_s: Option<f64>,
}

impl RunManifest {
    pub fn new(command: &str, params: impl Serialize) -> Self {
        let params = serde_json::to_value(params).expect("parameters serialize");
        let mut m = RunManifest {
            tool: env!("CARGO_PKG_NAME").to_owned(),
            version: env!("CARGO_PKG_VERSION").to_owned(),
            schema_version: SCHEMA_VERSION,
            command: command.to_owned(),
            params,
            notes: Vec::new(),
            config_digest: String::new(),
            wall_clock_s: None,
        };
        m.config_digest = m.digest();
        m
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self.config_digest = self.digest();
        self
    }

    /// Digest over the inputs only; `serde_json` maps keep keys sorted, so
    /// re-serialization cannot change it.
    pub fn digest(&self) -> String {
        let body = json!({
            "tool": self.tool,
            "version": self.version,
            "schema_version": self.schema_version,
            "command": self.command,
            "params": self.params,
            "notes": self.notes,
        });
        let canonical = serde_json::to_string(&body).expect("json value serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    /// Manifest without the wall-clock entry, safe to embed in data files.
    pub fn reproducible(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("manifest serializes");
        v.as_object_mut().unwrap().remove("wall_clock_s");
        v
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::param("out", format!("{}: {e}", path.display()))
}

/// Writes the data file and its `<out>.manifest.json` sidecar.
pub fn write_table(out: &Path, format: Format, table: &Table, manifest: &RunManifest) -> Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    let body = match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&table.to_json(&manifest.reproducible())).unwrap();
            s.push('\n');
            s
        }
    };
    fs::write(out, body).map_err(|e| io_error(out, e))?;
    let side = sidecar_path(out);
    let mut s = serde_json::to_string_pretty(manifest).unwrap();
    s.push('\n');
    fs::write(&side, s).map_err(|e| io_error(&side, e))
}
