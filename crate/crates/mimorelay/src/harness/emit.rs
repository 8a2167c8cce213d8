//! Result tables and their CSV/JSON serialization.

use std::io::Write;
use std::path::Path;

use serde_json::json;

use crate::error::{Error, Result};

/// Output serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidParameter(format!(
                "format must be `csv` or `json`, got `{other}`"
            ))),
        }
    }
}

/// One cell of a result table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
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

/// Named-column result table for one experiment run.
#[derive(Debug, Clone)]
pub struct Table {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

/// 17-significant-digit float formatting: round-trips every finite `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

impl Table {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        Table {
            experiment: experiment.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(v) => v.to_string(),
                    Cell::Float(v) => format_float(*v),
                    Cell::Text(v) => v.clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self, seed: u64, trials: usize) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (name, cell) in self.columns.iter().zip(row) {
                    let v = match cell {
                        Cell::Int(v) => json!(v),
                        Cell::Float(v) => json!(v),
                        Cell::Text(v) => json!(v),
                    };
                    obj.insert(name.clone(), v);
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        let doc = json!({
            "metadata": {
                "experiment": self.experiment,
                "seed": seed,
                "trials": trials,
                "version": env!("CARGO_PKG_VERSION"),
            },
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("static structure");
        text.push('\n');
        text
    }
}

/// Serialize a table to a file, or to stdout if no path is given.
pub fn emit(
    table: &Table,
    format: Format,
    path: Option<&Path>,
    seed: u64,
    trials: usize,
) -> Result<()> {
    let text = match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(seed, trials),
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(text.as_bytes()).map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_header_only() {
        let t = Table::new("demo", &["a", "b"]);
        assert_eq!(t.to_csv(), "a,b\n");
    }

    #[test]
    fn floats_round_trip_exactly() {
        let v = 0.1 + 0.2;
        let text = format_float(v);
        assert_eq!(text.parse::<f64>().unwrap().to_bits(), v.to_bits());
        for v in [1.0, -3.5e-300, std::f64::consts::PI, 1e308, 5e-324] {
            assert_eq!(format_float(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn csv_shape_and_line_endings() {
        let mut t = Table::new("demo", &["n", "rate", "tag"]);
        t.push(vec![64usize.into(), 1.5f64.into(), "mc".into()]);
        let csv = t.to_csv();
        assert!(csv.ends_with('\n'));
        assert!(!csv.contains('\r'));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], "n,rate,tag");
        assert!(lines[1].starts_with("64,1.5"));
        assert!(lines[1].ends_with(",mc"));
    }

    #[test]
    fn json_metadata_and_rows() {
        let mut t = Table::new("demo", &["n", "rate"]);
        t.push(vec![64usize.into(), 2.25f64.into()]);
        let doc: serde_json::Value = serde_json::from_str(&t.to_json(42, 1000)).unwrap();
        assert_eq!(doc["metadata"]["seed"], 42);
        assert_eq!(doc["metadata"]["trials"], 1000);
        assert_eq!(doc["metadata"]["experiment"], "demo");
        assert!(doc["metadata"]["version"].is_string());
        assert_eq!(doc["rows"][0]["n"], 64);
        assert_eq!(doc["rows"][0]["rate"], 2.25);
    }

    #[test]
    fn emit_writes_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let t = Table::new("demo", &["a"]);
        emit(&t, Format::Csv, Some(&path), 0, 1).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "a\n");
        // unwritable path surfaces the path
        let bad = dir.path().join("missing-dir").join("out.csv");
        let err = emit(&t, Format::Csv, Some(&bad), 0, 1).unwrap_err();
        assert!(err.to_string().contains("missing-dir"), "{err}");
    }
}
