//! Table emission in the two wire formats.
//!
//! CSV: optional `# key=value` provenance comment lines, a mandatory header
//! row, then data rows; floats print in Rust's shortest round-trip form, so
//! re-parsing reproduces the exact bits. JSON: one object with `command` and
//! the provenance keys at top level, and either inlined columns (single-row
//! tables) or a `rows` array.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;

use serde_json::{json, Map, Value};

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    UInt(u64),
    Float(f64),
    Str(String),
    /// Not applicable; empty in CSV, null in JSON.
    Null,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::UInt(v) => v.to_string(),
            Cell::Float(v) => v.to_string(),
            Cell::Str(s) => s.clone(),
            Cell::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::UInt(v) => json!(v),
            Cell::Float(v) if v.is_finite() => json!(v),
            Cell::Float(_) | Cell::Null => Value::Null,
            Cell::Str(s) => json!(s),
        }
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::UInt(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Str(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Null, Cell::Float)
    }
}

/// A subcommand's complete result.
#[derive(Debug, Clone)]
pub struct Table {
    pub command: &'static str,
    /// Provenance echoed into output headers (seed, samples, parameters, …).
    pub meta: Vec<(&'static str, Cell)>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Single-row tables inline their columns at the top level of the JSON
    /// object instead of nesting a one-element `rows` array.
    pub inline_single_row: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Table {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut header_comment = format!("# command={}", self.command);
        for (k, v) in &self.meta {
            let _ = write!(header_comment, " {k}={}", v.csv());
        }
        out.push_str(&header_comment);
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    fn to_json(&self) -> String {
        let mut obj = Map::new();
        obj.insert("command".into(), json!(self.command));
        for (k, v) in &self.meta {
            obj.insert((*k).into(), v.json());
        }
        if self.inline_single_row && self.rows.len() == 1 {
            for (col, cell) in self.columns.iter().zip(&self.rows[0]) {
                obj.insert((*col).into(), cell.json());
            }
        } else {
            let rows: Vec<Value> = self
                .rows
                .iter()
                .map(|row| {
                    let mut m = Map::new();
                    for (col, cell) in self.columns.iter().zip(row) {
                        m.insert((*col).into(), cell.json());
                    }
                    Value::Object(m)
                })
                .collect();
            obj.insert("rows".into(), Value::Array(rows));
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("serializable");
        s.push('\n');
        s
    }

    pub fn write(&self, format: Format, output: Option<&PathBuf>) -> io::Result<()> {
        let text = self.render(format);
        match output {
            Some(path) => fs::write(path, text),
            None => io::stdout().write_all(text.as_bytes()),
        }
    }
}
