//! JSON and CSV rendering of reports.
//!
//! Both formats go through a `serde_json::Value`: object keys come out
//! sorted and every float is rounded to 12 significant digits, so the same
//! report always renders to the same bytes.

use fairwelfare_core::experiments::SweepReport;
use serde::Serialize;
use serde_json::{Number, Value};

pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

pub fn round_significant(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses")
}

fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().expect("f64 number"));
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(rounded).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

/// The report as a rounded JSON tree.
pub fn to_value<T: Serialize>(report: &T) -> Value {
    rounded(serde_json::to_value(report).expect("reports serialize to JSON"))
}

pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut text = serde_json::to_string_pretty(&to_value(report)).expect("JSON values serialize");
    text.push('\n');
    text
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&key(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), v, out);
            }
        }
        leaf => out.push((prefix.to_string(), scalar(leaf))),
    }
}

fn write_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

/// One `key,value` row per leaf, keys joined with `.` in sorted order.
pub fn to_key_value_csv<T: Serialize>(report: &T) -> String {
    let mut rows = Vec::new();
    flatten("", &to_value(report), &mut rows);
    write_csv(&["key", "value"], rows.into_iter().map(|(k, v)| vec![k, v]))
}

pub const SWEEP_COLUMNS: [&str; 13] = [
    "index",
    "tv_distance",
    "diverged",
    "co_accuracy",
    "sw_welfare",
    "sw_welfare_at_co",
    "welfare_gap",
    "sw_violation",
    "co_policy",
    "sw_policy",
    "co_grid_within_bound",
    "sw_grid_within_bound",
    "error",
];

/// One row per sampled population; policies are `;`-separated dense rows.
pub fn sweep_csv(report: &SweepReport) -> String {
    let rows = report.rows.iter().map(|r| {
        let Value::Object(map) = to_value(r) else {
            unreachable!("a sweep row serializes to an object")
        };
        SWEEP_COLUMNS
            .iter()
            .map(|c| match map.get(*c) {
                Some(Value::Array(items)) => items.iter().map(scalar).collect::<Vec<_>>().join(";"),
                Some(v) => scalar(v),
                None => String::new(),
            })
            .collect()
    });
    write_csv(&SWEEP_COLUMNS, rows)
}

/// A report that renders itself in either format.
pub trait Render {
    fn render(&self, format: Format) -> String;
}

impl Render for SweepReport {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => to_json(self),
            Format::Csv => sweep_csv(self),
        }
    }
}

/// Any serializable report with the generic layouts.
pub struct Generic<'a, T>(pub &'a T);

impl<T: Serialize> Render for Generic<'_, T> {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => to_json(self.0),
            Format::Csv => to_key_value_csv(self.0),
        }
    }
}
