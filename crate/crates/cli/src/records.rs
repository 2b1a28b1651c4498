//! Typed output tables, written as CSV or as structured text (JSON).
//!
//! Several tables may be emitted by one command. In CSV they are separated by a
//! single blank line, each with its own header row; in structured text they form
//! a JSON array. Floats use the shortest representation that parses back to the
//! same `f64`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Int,
    Float,
    Bool,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: Kind,
}

impl Column {
    pub fn new(name: &str, kind: Kind) -> Self {
        Self { name: name.to_string(), kind }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    Null,
}

impl Value {
    fn kind(&self) -> Option<Kind> {
        match self {
            Value::Int(_) => Some(Kind::Int),
            Value::Float(_) => Some(Kind::Float),
            Value::Bool(_) => Some(Kind::Bool),
            Value::Text(_) => Some(Kind::Text),
            Value::Null => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Float(x) => Some(*x),
            Value::Int(i) => Some(*i as f64),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    fn parse(field: &str, kind: Kind) -> Result<Value, CliError> {
        if field.is_empty() {
            return Ok(Value::Null);
        }
        let bad = || CliError::Parse(format!("cannot read {field:?} as {kind:?}"));
        Ok(match kind {
            Kind::Int => Value::Int(field.parse().map_err(|_| bad())?),
            Kind::Float => Value::Float(field.parse().map_err(|_| bad())?),
            Kind::Bool => Value::Bool(field.parse().map_err(|_| bad())?),
            Kind::Text => Value::Text(field.to_string()),
        })
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Int(i) => (*i).into(),
            Value::Float(x) => serde_json::Number::from_f64(*x).map_or(serde_json::Value::Null, Into::into),
            Value::Bool(b) => (*b).into(),
            Value::Text(s) => s.clone().into(),
            Value::Null => serde_json::Value::Null,
        }
    }

    fn from_json(v: &serde_json::Value, kind: Kind) -> Result<Value, CliError> {
        let bad = || CliError::Parse(format!("cannot read {v} as {kind:?}"));
        Ok(match (v, kind) {
            (serde_json::Value::Null, _) => Value::Null,
            (serde_json::Value::Number(n), Kind::Int) => Value::Int(n.as_i64().ok_or_else(bad)?),
            (serde_json::Value::Number(n), Kind::Float) => Value::Float(n.as_f64().ok_or_else(bad)?),
            (serde_json::Value::Bool(b), Kind::Bool) => Value::Bool(*b),
            (serde_json::Value::String(s), Kind::Text) => Value::Text(s.clone()),
            _ => return Err(bad()),
        })
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Text(s) => f.write_str(s),
            Value::Null => Ok(()),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<i32> for Value {
    fn from(v: i32) -> Self {
        Value::Int(v.into())
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, columns: Vec<Column>) -> Self {
        Self { name: name.to_string(), columns, rows: Vec::new() }
    }

    /// Panics when the row does not match the column layout; rows are built by
    /// this crate only.
    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width for table {}", self.name);
        for (v, c) in row.iter().zip(&self.columns) {
            if let Some(k) = v.kind() {
                assert_eq!(k, c.kind, "column {} of table {}", c.name, self.name);
            }
        }
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn get(&self, row: usize, column: &str) -> Option<&Value> {
        self.rows.get(row)?.get(self.column(column)?)
    }

    fn write_csv(&self, out: &mut Vec<u8>) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))?;
        for row in &self.rows {
            w.write_record(row.iter().map(ToString::to_string))?;
        }
        w.flush()?;
        Ok(())
    }

    fn read_csv(name: &str, columns: &[Column], text: &str) -> Result<Table, CliError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let expected: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
        if header != expected {
            return Err(CliError::Parse(format!("header {header:?} does not match {expected:?}")));
        }
        let mut table = Table::new(name, columns.to_vec());
        for record in r.records() {
            let record = record?;
            let row = record
                .iter()
                .zip(columns)
                .map(|(field, c)| Value::parse(field, c.kind))
                .collect::<Result<Vec<_>, _>>()?;
            table.rows.push(row);
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    StructuredText,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "structured-text" | "json" => Ok(Format::StructuredText),
            other => Err(CliError::Usage(format!("unknown format {other:?}; expected csv or structured-text"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    name: String,
    columns: Vec<Column>,
    rows: Vec<Vec<serde_json::Value>>,
}

pub fn serialize(tables: &[Table], format: Format) -> Result<Vec<u8>, CliError> {
    let mut out = Vec::new();
    match format {
        Format::Csv => {
            for (k, t) in tables.iter().enumerate() {
                if k > 0 {
                    out.push(b'\n');
                }
                t.write_csv(&mut out)?;
            }
        }
        Format::StructuredText => {
            let doc: Vec<JsonTable> = tables
                .iter()
                .map(|t| JsonTable {
                    name: t.name.clone(),
                    columns: t.columns.clone(),
                    rows: t.rows.iter().map(|r| r.iter().map(Value::to_json).collect()).collect(),
                })
                .collect();
            serde_json::to_writer_pretty(&mut out, &doc)?;
            out.push(b'\n');
        }
    }
    Ok(out)
}

/// Reads tables back. CSV carries no names or types, so the caller supplies the
/// expected layout (`(name, columns)` per table); structured text is
/// self-describing and `layout` is ignored for it.
pub fn parse(text: &str, format: Format, layout: &[(&str, Vec<Column>)]) -> Result<Vec<Table>, CliError> {
    match format {
        Format::Csv => {
            let blocks: Vec<&str> = text.split("\n\n").filter(|b| !b.trim().is_empty()).collect();
            if blocks.len() != layout.len() {
                return Err(CliError::Parse(format!("expected {} tables, found {}", layout.len(), blocks.len())));
            }
            blocks.iter().zip(layout).map(|(b, (name, cols))| Table::read_csv(name, cols, b)).collect()
        }
        Format::StructuredText => {
            let doc: Vec<JsonTable> = serde_json::from_str(text)?;
            doc.into_iter()
                .map(|t| {
                    let rows = t
                        .rows
                        .iter()
                        .map(|r| {
                            if r.len() != t.columns.len() {
                                return Err(CliError::Parse("row width mismatch".into()));
                            }
                            r.iter().zip(&t.columns).map(|(v, c)| Value::from_json(v, c.kind)).collect()
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(Table { name: t.name, columns: t.columns, rows })
                })
                .collect()
        }
    }
}

/// `(name, columns)` of each table, as [`parse`] expects for CSV.
pub fn layout(tables: &[Table]) -> Vec<(&str, Vec<Column>)> {
    tables.iter().map(|t| (t.name.as_str(), t.columns.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample() -> Vec<Table> {
        let mut a = Table::new(
            "a",
            vec![
                Column::new("k", Kind::Int),
                Column::new("p", Kind::Float),
                Column::new("label", Kind::Text),
                Column::new("ok", Kind::Bool),
            ],
        );
        a.push(vec![0.into(), 0.125.into(), "x, \"quoted\"".into(), true.into()]);
        a.push(vec![1.into(), (1.0 / 3.0).into(), Value::Null, false.into()]);
        let mut b = Table::new("b", vec![Column::new("v", Kind::Float)]);
        b.push(vec![1e-300.into()]);
        vec![a, b]
    }

    #[test]
    fn csv_layout() {
        let bytes = serialize(&sample()[..1], Format::Csv).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text, "k,p,label,ok\n0,0.125,\"x, \"\"quoted\"\"\",true\n1,0.3333333333333333,,false\n");
    }

    #[test]
    fn both_formats_round_trip() {
        let tables = sample();
        for format in [Format::Csv, Format::StructuredText] {
            let text = String::from_utf8(serialize(&tables, format).unwrap()).unwrap();
            assert_eq!(parse(&text, format, &layout(&tables)).unwrap(), tables, "{format:?}");
        }
    }

    #[test]
    fn csv_header_mismatch_rejected() {
        let text = "x,y\n1,2\n";
        let layout = [("t", vec![Column::new("k", Kind::Int), Column::new("p", Kind::Float)])];
        assert!(parse(text, Format::Csv, &layout).is_err());
    }

    proptest! {
        #[test]
        fn floats_round_trip(values in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..20),
                             ints in prop::collection::vec(any::<i64>(), 1..20)) {
            let mut t = Table::new("t", vec![Column::new("x", Kind::Float), Column::new("i", Kind::Int)]);
            for (x, i) in values.iter().zip(ints.iter().cycle()) {
                t.push(vec![(*x).into(), (*i).into()]);
            }
            let tables = vec![t];
            for format in [Format::Csv, Format::StructuredText] {
                let text = String::from_utf8(serialize(&tables, format).unwrap()).unwrap();
                prop_assert_eq!(&parse(&text, format, &layout(&tables)).unwrap(), &tables);
            }
        }
    }
}
