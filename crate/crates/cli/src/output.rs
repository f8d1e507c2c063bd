//! Rendering: JSON or CSV, twelve significant digits, infinities as strings.

use serde_json::{Map, Value};
use thermocool::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EnumerationCapExceeded { .. } | Error::SolverStall(_) => {
                Failure::solver(e.to_string())
            }
            _ => Failure::input(e.to_string()),
        }
    }
}

pub fn num(x: f64) -> Value {
    if x.is_nan() {
        return Value::from("nan");
    }
    if x.is_infinite() {
        return Value::from(if x > 0.0 { "inf" } else { "-inf" });
    }
    let r: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    if r == r.trunc() && r.abs() < 1e15 {
        return Value::from(r as i64);
    }
    Value::from(r)
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub enum Report {
    Doc(Value),
    Table {
        columns: Vec<&'static str>,
        rows: Vec<Vec<Value>>,
        meta: Map<String, Value>,
    },
}

impl Report {
    pub fn default_format(&self) -> Format {
        match self {
            Report::Doc(_) => Format::Json,
            Report::Table { .. } => Format::Csv,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match (self, format) {
            (Report::Doc(v), Format::Json) => pretty(v),
            (Report::Doc(v), Format::Csv) => {
                let mut cells = Vec::new();
                flatten("", v, &mut cells);
                let header: Vec<&str> = cells.iter().map(|(k, _)| k.as_str()).collect();
                let values: Vec<String> = cells.iter().map(|(_, v)| cell(v)).collect();
                format!("{}\n{}\n", header.join(","), values.join(","))
            }
            (
                Report::Table {
                    columns,
                    rows,
                    meta,
                },
                Format::Json,
            ) => {
                let mut doc = meta.clone();
                let rows = rows
                    .iter()
                    .map(|r| {
                        Value::Object(
                            columns
                                .iter()
                                .map(|c| c.to_string())
                                .zip(r.iter().cloned())
                                .collect(),
                        )
                    })
                    .collect();
                doc.insert("rows".into(), Value::Array(rows));
                pretty(&Value::Object(doc))
            }
            (Report::Table { columns, rows, .. }, Format::Csv) => {
                let mut out = columns.join(",");
                out.push('\n');
                for r in rows {
                    out.push_str(&r.iter().map(cell).collect::<Vec<_>>().join(","));
                    out.push('\n');
                }
                out
            }
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .for_each(|(i, x)| flatten(&key(&i.to_string()), x, out)),
        scalar => out.push((prefix.to_string(), scalar.clone())),
    }
}
