//! CSV and JSON artifacts. Every float is written with 17 significant
//! digits so that outputs round-trip exactly.

use std::fmt::Write as _;
use std::io::{self, Write};

use serde::Serialize;
use serde_json::Value;

use crate::diagnostics::Diagnostic;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Short commit hash recorded at build time, when built from a git checkout.
pub const GIT_HASH: Option<&str> = option_env!("CORRDECO_GIT_HASH");

/// Environment variable naming the artifact directory (default: cwd).
pub const OUTPUT_DIR_VAR: &str = "CORRDECO_OUTPUT_DIR";

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => fmt_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

/// Rectangular results table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    /// Header line then one line per row. Cells never contain commas.
    pub fn write_body<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// First CSV line: a comment carrying the version stamp.
pub fn csv_stamp(scenario: &str, hash: &str) -> String {
    let git = GIT_HASH.map(|g| format!(" git={g}")).unwrap_or_default();
    format!("# corrdeco {VERSION}{git} scenario={scenario} config={hash}")
}

/// Machine-readable record of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub git: Option<&'static str>,
    pub scenario: String,
    pub config_hash: String,
    pub inputs: Value,
    pub results: Value,
    pub warnings: Vec<Diagnostic>,
    pub exit_status: i32,
}

/// Pretty JSON with floats at 17 significant digits. Non-finite floats have
/// already become `null` in `Value`.
pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |out: &mut String, d: usize| {
        for _ in 0..d {
            out.push_str("  ");
        }
    };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_float(n.as_f64().unwrap()));
            } else {
                write!(out, "{n}").unwrap();
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(out, depth + 1);
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            out.push_str("{\n");
            for (i, (k, x)) in m.iter().enumerate() {
                pad(out, depth + 1);
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < m.len() { ",\n" } else { "\n" });
            }
            pad(out, depth);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_with_17_digits() {
        let x = 1.0 - (-1.0f64).exp();
        let s = fmt_float(x);
        assert_eq!(s.split('e').next().unwrap().replace('.', "").len(), 17);
        assert_eq!(s.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn json_is_valid_and_exact() {
        let v = serde_json::json!({"a": 0.1, "b": [1, 2.5e-300], "c": "q\"", "d": null});
        let s = to_json(&v).unwrap();
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
        assert_eq!(back["b"][0].as_u64(), Some(1));
        assert_eq!(back["b"][1].as_f64(), Some(2.5e-300));
        assert_eq!(back["c"], "q\"");
        assert!(s.contains("1.0000000000000001e-1"));
    }

    #[test]
    fn table_renders_cells() {
        let mut t = Table::new(&["n", "x", "ok", "w"]);
        t.push(vec![3usize.into(), 0.5.into(), true.into(), Cell::Empty]);
        let mut buf = Vec::new();
        t.write_body(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,x,ok,w\n3,5.0000000000000000e-1,true,\n");
    }
}
