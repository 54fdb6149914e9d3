//! CSV and JSON rendering.
//!
//! Every file starts with the command name, the seed and the resolved
//! configuration: in CSV as `#` comment lines, in JSON as top-level fields.
//! Linear columns that overflow print `inf`; the log-domain column next to
//! them stays exact.

use serde::Serialize;
use serde_json::{Map, Value};

use super::args::Format;
use super::config::RunConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    /// `None` is an overflowed linear value.
    fn from(v: Option<f64>) -> Self {
        Cell::Num(v.unwrap_or(f64::INFINITY))
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
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

/// Shortest round-trip decimal, switching to exponent form outside
/// [1e-4, 1e15).
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_f64(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }
}

/// Everything a command produced, before formatting.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// Per-row records for JSON output.
    pub results: Value,
    /// Extra top-level JSON fields, also printed as CSV comment lines.
    pub extras: Vec<(&'static str, Value)>,
    /// Some rows come from an evaluation that ran out of budget.
    pub partial: bool,
}

impl Outcome {
    pub fn new<T: Serialize>(columns: Vec<&'static str>, rows: Vec<Vec<Cell>>, results: &T) -> Result<Self> {
        Ok(Self {
            columns,
            rows,
            results: serde_json::to_value(results)?,
            extras: Vec::new(),
            partial: false,
        })
    }

    pub fn with_extra<T: Serialize>(mut self, key: &'static str, value: &T) -> Result<Self> {
        self.extras.push((key, serde_json::to_value(value)?));
        Ok(self)
    }
}

pub fn render(cfg: &RunConfig, outcome: &Outcome) -> Result<Vec<u8>> {
    match cfg.format {
        Format::Json => render_json(cfg, outcome),
        Format::Csv => render_csv(cfg, outcome),
    }
}

fn render_json(cfg: &RunConfig, outcome: &Outcome) -> Result<Vec<u8>> {
    let mut top = Map::new();
    top.insert("command".into(), Value::from(cfg.name()));
    top.insert("seed".into(), cfg.seed().map_or(Value::Null, Value::from));
    top.insert("config".into(), serde_json::to_value(cfg)?);
    top.insert("partial".into(), Value::from(outcome.partial));
    top.insert("results".into(), outcome.results.clone());
    for (k, v) in &outcome.extras {
        top.insert((*k).into(), v.clone());
    }
    let mut bytes = serde_json::to_vec_pretty(&Value::Object(top))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn render_csv(cfg: &RunConfig, outcome: &Outcome) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut header = format!("# lsi {}\n", cfg.name());
    match cfg.seed() {
        Some(s) => header.push_str(&format!("# seed: {s}\n")),
        None => header.push_str("# seed: none\n"),
    }
    header.push_str(&format!("# config: {}\n", serde_json::to_string(cfg)?));
    if outcome.partial {
        header.push_str("# partial: true\n");
    }
    for (k, v) in &outcome.extras {
        header.push_str(&format!("# {k}: {}\n", serde_json::to_string(v)?));
    }
    out.extend_from_slice(header.as_bytes());
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&outcome.columns)?;
        for row in &outcome.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
    }
    Ok(out)
}
