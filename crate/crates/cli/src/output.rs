//! Tables and their CSV/JSON renderings.

use std::path::Path;

use serde_json::{json, Value};

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &'static str, header: &[&'static str]) -> Self {
        Table {
            name,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// A float cell; non-finite values become null (empty in CSV).
pub fn f(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn i(n: impl Into<i64>) -> Value {
    Value::from(n.into())
}

pub fn u(n: usize) -> Value {
    Value::from(n as u64)
}

pub fn s(x: impl Into<String>) -> Value {
    Value::String(x.into())
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn render(table: &Table, format: Format, seed: u64) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&table.header).map_err(CliError::io)?;
            for row in &table.rows {
                w.write_record(row.iter().map(cell)).map_err(CliError::io)?;
            }
            let mut bytes = w.into_inner().map_err(|e| CliError::io(e.error()))?;
            bytes.extend_from_slice(format!("# seed={seed}\n# version={VERSION}\n").as_bytes());
            Ok(bytes)
        }
        Format::Json => {
            let doc = json!({
                "table": table.name,
                "columns": table.header,
                "rows": table.rows,
                "seed": seed,
                "version": VERSION,
            });
            let mut bytes = serde_json::to_vec_pretty(&doc).map_err(CliError::io)?;
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

pub fn write(table: &Table, format: Format, seed: u64, path: &Path) -> Result<(), CliError> {
    let bytes = render(table, format, seed)?;
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_trailer() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec![f(0.5), f(f64::NAN)]);
        t.push(vec![i(3), s("q,r")]);
        let text = String::from_utf8(render(&t, Format::Csv, 9).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "a,b");
        assert_eq!(lines[1], "0.5,");
        assert_eq!(lines[2], "3,\"q,r\"");
        assert_eq!(lines[3], "# seed=9");
        assert!(lines[4].starts_with("# version="));
    }
}
