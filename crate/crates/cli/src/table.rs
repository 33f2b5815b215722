//! Row-oriented reports and their CSV / JSON encodings.

use std::io::{self, Write};

use serde_json::{Map, Number, Value};

use crate::config::Format;

pub const STATUS: &str = "status";

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    /// Shortest text that parses back to the same value.
    pub fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v}"),
            Cell::Int(v) => v.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Num(v) => Number::from_f64(*v).map(Value::Number).unwrap_or_else(|| Value::String(format!("{v}"))),
            Cell::Int(v) => Value::from(*v),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
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

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// A table whose last column is always `status` (`ok` or `error: ...`).
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub summary: Vec<String>,
}

impl Report {
    pub fn new(columns: &[&str]) -> Self {
        let mut columns: Vec<String> = columns.iter().map(|c| c.to_string()).collect();
        columns.push(STATUS.to_string());
        Report { columns, rows: Vec::new(), summary: Vec::new() }
    }

    /// Appends a data row; `cells` excludes the status column.
    pub fn push_ok(&mut self, cells: Vec<Cell>) {
        self.push(cells, "ok".to_string());
    }

    /// Appends a row whose missing trailing cells are left empty.
    pub fn push_error(&mut self, mut cells: Vec<Cell>, message: impl std::fmt::Display) {
        cells.resize(self.columns.len() - 1, Cell::Empty);
        self.push(cells, format!("error: {message}"));
    }

    fn push(&mut self, mut cells: Vec<Cell>, status: String) {
        assert_eq!(cells.len(), self.columns.len() - 1, "row width");
        cells.push(Cell::Text(status));
        self.rows.push(cells);
    }

    pub fn error_rows(&self) -> usize {
        self.rows.iter().filter(|r| !is_ok(r)).count()
    }

    /// True when there is at least one row and none succeeded.
    pub fn all_failed(&self) -> bool {
        !self.rows.is_empty() && self.error_rows() == self.rows.len()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write<W: Write>(&self, format: Format, out: W) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()
    }

    fn write_json<W: Write>(&self, mut out: W) -> io::Result<()> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> =
                    self.columns.iter().cloned().zip(row.iter().map(Cell::to_json)).collect();
                Value::Object(obj)
            })
            .collect();
        serde_json::to_writer_pretty(&mut out, &Value::Array(rows))?;
        out.write_all(b"\n")
    }
}

fn is_ok(row: &[Cell]) -> bool {
    matches!(row.last(), Some(Cell::Text(s)) if s == "ok")
}
