//! CSV and JSON artifacts with shortest round-trip floats and atomic writes.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Bumped whenever a CSV header or JSON layout changes.
pub const SCHEMA_VERSION: u32 = 1;

pub fn version_string() -> String {
    format!("superradiant {} schema {}", env!("CARGO_PKG_VERSION"), SCHEMA_VERSION)
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    if v.is_finite() {
        ryu::Buffer::new().format_finite(v).to_string()
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Lower-case hex SHA-256 of `text`.
pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
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

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
            Cell::Text(t) => t.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    /// `#` comment lines, header, then one line per row.
    pub fn render(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            for line in c.lines() {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// Largest scaled residual over all solves.
    pub residual: f64,
    /// Total solver iterations.
    pub iterations: usize,
    /// Seconds.
    pub wallclock: f64,
}

/// JSON envelope shared by every mode.
pub fn json_document(mode: &str, config_echo: Value, results: Value, diag: Diagnostics) -> Value {
    json!({
        "version": version_string(),
        "config_echo": config_echo,
        "mode": mode,
        "results": results,
        "diagnostics": {
            "residual": finite_or_null(diag.residual),
            "iterations": diag.iterations,
            "wallclock": diag.wallclock,
        },
    })
}

pub fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

/// Machine-readable error report.
pub fn error_json(err: &Error) -> Value {
    let mut body = json!({
        "kind": err.kind(),
        "message": err.to_string(),
        "exit_code": err.exit_code(),
    });
    if let Error::Config { line, .. } = err {
        body["line"] = json!(line);
    }
    if let Error::Parameter { name, .. } = err {
        body["parameter"] = json!(name);
    }
    json!({ "version": version_string(), "error": body })
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    tmp.write_all(contents).map_err(|e| io_err(path, e))?;
    tmp.as_file().sync_all().map_err(|e| io_err(path, e))?;
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1e-10, 3.0e10, -2.5, 1.0 / 3.0, f64::MIN_POSITIVE, 123456789.123] {
            let s = format_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_f64(f64::NAN), "NaN");
        assert_eq!(format_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_f64(0.1), "0.1");
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(["a", "b", "c", "d"]);
        t.push(vec![0.5.into(), 3usize.into(), true.into(), "x,y".into()]);
        let text = t.render(&["version 1".into(), "two\nlines".into()]);
        assert_eq!(text, "# version 1\n# two\n# lines\na,b,c,d\n0.5,3,true,\"x,y\"\n");
    }

    #[test]
    #[should_panic]
    fn ragged_row_panics() {
        CsvTable::new(["a"]).push(vec![1.0.into(), 2.0.into()]);
    }

    #[test]
    fn hash_is_stable() {
        assert_eq!(
            sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("out.csv");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "second");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn unwritable_target_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err = write_atomic(&blocker.join("out.csv"), b"x").unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn envelope_fields() {
        let d = Diagnostics { residual: 1e-12, iterations: 4, wallclock: 0.5 };
        let v = json_document("steady", json!({}), json!({"x": 1}), d);
        for key in ["version", "config_echo", "mode", "results", "diagnostics"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["diagnostics"]["iterations"], 4);
        let e = error_json(&Error::Config { line: 3, message: "bad".into() });
        assert_eq!(e["error"]["line"], 3);
        assert_eq!(e["error"]["exit_code"], 1);
    }
}
