//! Tables, CSV/JSON serialization and the per-run manifest.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::args::Format;
use crate::settings::Settings;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
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
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) if v.is_nan() => "NaN".into(),
            // 17 significant digits round-trip every f64
            Cell::Num(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Num(_) => Value::Null,
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_bytes(&self, format: Format) -> anyhow::Result<Vec<u8>> {
        match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
                w.write_record(&self.columns)?;
                for r in &self.rows {
                    w.write_record(r.iter().map(Cell::csv))?;
                }
                Ok(w.into_inner()?)
            }
            Format::Json => {
                let rows: Vec<Vec<Value>> = self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect();
                let mut b = serde_json::to_vec_pretty(&json!({ "columns": self.columns, "rows": rows }))?;
                b.push(b'\n');
                Ok(b)
            }
        }
    }
}

#[derive(Debug, Serialize)]
struct OutputFile {
    file: String,
    sha256: String,
    rows: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: String,
    subcommand: &'a str,
    version: &'a str,
    settings: &'a Settings,
    rtol: f64,
    atol: f64,
    created_unix_s: u64,
    wall_time_s: f64,
    outputs: Vec<OutputFile>,
    notes: Value,
}

/// Writes every table and one manifest referencing them; returns the manifest path.
pub fn write_run(settings: &Settings, subcommand: &str, tables: &[Table], notes: Value, started: Instant) -> anyhow::Result<PathBuf> {
    let dir = &settings.out_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let ext = match settings.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut outputs = Vec::new();
    for t in tables {
        let bytes = t.to_bytes(settings.format)?;
        let file = format!("{}.{ext}", t.name);
        write(&dir.join(&file), &bytes)?;
        outputs.push(OutputFile { file, sha256: hex::encode(Sha256::digest(&bytes)), rows: t.rows.len() });
    }
    let manifest = Manifest {
        command: std::env::args().collect::<Vec<_>>().join(" "),
        subcommand,
        version: env!("CARGO_PKG_VERSION"),
        settings,
        rtol: settings.rtol,
        atol: settings.atol,
        created_unix_s: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        wall_time_s: started.elapsed().as_secs_f64(),
        outputs,
        notes,
    };
    let path = dir.join(format!("{subcommand}.manifest.json"));
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    write(&path, &bytes)?;
    Ok(path)
}

fn write(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_doubles() {
        let mut t = Table::new("x", &["a", "b", "c"]);
        let v = 0.1 + 0.2;
        t.push(vec![v.into(), 3usize.into(), "s".into()]);
        t.push(vec![f64::NAN.into(), true.into(), "u".into()]);
        let s = String::from_utf8(t.to_bytes(Format::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "a,b,c");
        let back: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(back, v);
        assert_eq!(lines[2], "NaN,1,u");
        assert!(!s.contains('\r'));
    }

    #[test]
    fn json_nan_is_null() {
        let mut t = Table::new("x", &["a"]);
        t.push(vec![f64::NAN.into()]);
        let v: Value = serde_json::from_slice(&t.to_bytes(Format::Json).unwrap()).unwrap();
        assert_eq!(v["rows"][0][0], Value::Null);
    }
}
