//! Result documents and their CSV and JSON encodings.
//!
//! Both encodings are pure functions of the document, so identical results
//! give byte-identical files. CSV numbers carry 17 significant digits and
//! parse back to the same `f64`; JSON numbers use the shortest round-trip
//! form. Absent values are empty CSV fields and JSON `null`.

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn num(v: Option<f64>) -> Self {
        match v {
            Some(x) if x.is_finite() => Cell::Num(x),
            _ => Cell::Empty,
        }
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn csv_field(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::num(Some(x))
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::text(s)
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Num(x) => s.serialize_f64(*x),
            Cell::Text(t) => s.serialize_str(t),
            Cell::Empty => s.serialize_none(),
        }
    }
}

/// 17 significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let write_err = |e: csv::Error| CliError::Write {
            path: "<csv buffer>".into(),
            source: std::io::Error::other(e),
        };
        w.write_record(&self.columns).map_err(write_err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv_field)).map_err(write_err)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Write { path: "<csv buffer>".into(), source: e.into_error() })
    }
}

struct RowRef<'a> {
    columns: &'a [String],
    cells: &'a [Cell],
}

impl Serialize for RowRef<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.columns.len()))?;
        for (k, v) in self.columns.iter().zip(self.cells) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.rows.len()))?;
        for row in &self.rows {
            seq.serialize_element(&RowRef { columns: &self.columns, cells: row })?;
        }
        seq.end()
    }
}

/// Named scalars followed by named tables, in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub fields: Vec<(String, Cell)>,
    pub tables: Vec<(String, Table)>,
}

impl Document {
    pub fn field(mut self, key: &str, value: impl Into<Cell>) -> Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn table(mut self, key: &str, table: Table) -> Self {
        self.tables.push((key.to_string(), table));
        self
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn get_table(&self, key: &str) -> Option<&Table> {
        self.tables.iter().find(|(k, _)| k == key).map(|(_, t)| t)
    }

    /// The CSV view: the first table, or the scalars as a one-row table when
    /// there is none.
    pub fn primary_table(&self) -> Table {
        match self.tables.first() {
            Some((_, t)) => t.clone(),
            None => Table {
                columns: self.fields.iter().map(|(k, _)| k.clone()).collect(),
                rows: vec![self.fields.iter().map(|(_, v)| v.clone()).collect()],
            },
        }
    }

    /// Tables after the first, written to side files in CSV mode.
    pub fn secondary_tables(&self) -> &[(String, Table)] {
        self.tables.get(1..).unwrap_or(&[])
    }

    pub fn to_json(&self) -> Vec<u8> {
        // Keys are strings and cells are plain values; serialization cannot fail.
        let mut out = serde_json::to_vec_pretty(self).unwrap();
        out.push(b'\n');
        out
    }
}

impl Serialize for Document {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.fields.len() + self.tables.len()))?;
        for (k, v) in &self.fields {
            map.serialize_entry(k, v)?;
        }
        for (k, t) in &self.tables {
            map.serialize_entry(k, t)?;
        }
        map.end()
    }
}
