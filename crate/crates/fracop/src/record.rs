//! Output records. Column order is fixed per command; CSV, JSON lines and
//! plain text all carry the same fields in the same order.

use std::io::{self, Write};

use crate::matrix_io::fmt_f64;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    F(f64),
    U(u64),
    B(bool),
    S(String),
}

impl Value {
    fn text(&self) -> String {
        match self {
            Value::F(v) => fmt_f64(*v),
            Value::U(v) => v.to_string(),
            Value::B(v) => v.to_string(),
            Value::S(v) => v.clone(),
        }
    }

    fn json(&self) -> String {
        match self {
            Value::F(v) if v.is_finite() => fmt_f64(*v),
            Value::F(_) => "null".into(),
            Value::U(v) => v.to_string(),
            Value::B(v) => v.to_string(),
            Value::S(v) => serde_json::Value::from(v.as_str()).to_string(),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::F(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::U(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::U(v as u64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::B(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::S(v.into())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::S(v)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Record {
    pub columns: Vec<(&'static str, Value)>,
    /// Column printed alone in plain format; without one, plain prints `key=value` pairs.
    pub headline: Option<usize>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(mut self, key: &'static str, value: impl Into<Value>) -> Self {
        self.columns.push((key, value.into()));
        self
    }

    pub fn headline(mut self, key: &str) -> Self {
        self.headline = self.columns.iter().position(|(k, _)| *k == key);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.columns.iter().find(|(k, _)| *k == key).map(|(_, v)| v)
    }

    fn header(&self) -> Vec<&'static str> {
        self.columns.iter().map(|(k, _)| *k).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
    Plain,
}

/// Writes records, emitting a CSV header whenever the column set changes.
pub struct RecordWriter<W: Write> {
    out: W,
    format: Format,
    last_header: Option<Vec<&'static str>>,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(out: W, format: Format) -> Self {
        Self { out, format, last_header: None }
    }

    pub fn write(&mut self, rec: &Record) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                let header = rec.header();
                if self.last_header.as_ref() != Some(&header) {
                    self.csv_line(header.iter().map(|s| s.to_string()))?;
                    self.last_header = Some(header);
                }
                self.csv_line(rec.columns.iter().map(|(_, v)| v.text()))
            }
            Format::Jsonl => {
                let body: Vec<String> = rec
                    .columns
                    .iter()
                    .map(|(k, v)| format!("{}:{}", serde_json::Value::from(*k), v.json()))
                    .collect();
                writeln!(self.out, "{{{}}}", body.join(","))
            }
            Format::Plain => match rec.headline {
                Some(i) => writeln!(self.out, "{}", rec.columns[i].1.text()),
                None => {
                    let body: Vec<String> = rec.columns.iter().map(|(k, v)| format!("{k}={}", v.text())).collect();
                    writeln!(self.out, "{}", body.join(" "))
                }
            },
        }
    }

    fn csv_line(&mut self, fields: impl Iterator<Item = String>) -> io::Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(fields.collect::<Vec<_>>()).map_err(io::Error::other)?;
        let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
        self.out.write_all(&bytes)
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
