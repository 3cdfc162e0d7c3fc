//! Rendering of command results as JSON, CSV or aligned text.
//!
//! Numbers go through `serde_json` in both JSON and CSV, so both formats carry
//! the same shortest round-trip decimal for every value.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;

/// A command result: either a table of flat rows or a nested record.
#[derive(Debug, Clone)]
pub enum Output {
    Table(Vec<Map<String, Value>>),
    Record(Value),
}

impl Output {
    pub fn table<T: Serialize>(rows: &[T]) -> Result<Self, serde_json::Error> {
        let rows = rows
            .iter()
            .map(|r| match serde_json::to_value(r)? {
                Value::Object(m) => Ok(m),
                other => {
                    let mut m = Map::new();
                    m.insert("value".into(), other);
                    Ok(m)
                }
            })
            .collect::<Result<Vec<_>, serde_json::Error>>()?;
        Ok(Output::Table(rows))
    }

    pub fn record<T: Serialize>(value: &T) -> Result<Self, serde_json::Error> {
        Ok(Output::Record(serde_json::to_value(value)?))
    }

    pub fn json_value(&self) -> Value {
        match self {
            Output::Table(rows) => Value::Array(rows.iter().cloned().map(Value::Object).collect()),
            Output::Record(v) => v.clone(),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json_value()).expect("serialisable value");
                s.push('\n');
                s
            }
            Format::Csv => self.csv(),
            Format::Pretty => self.pretty(),
        }
    }

    fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        match self {
            Output::Table(rows) => {
                let flat: Vec<Vec<(String, String)>> = rows.iter().map(flatten_map).collect();
                if let Some(first) = flat.first() {
                    w.write_record(first.iter().map(|(k, _)| k)).expect("in-memory write");
                }
                for row in &flat {
                    w.write_record(row.iter().map(|(_, v)| v)).expect("in-memory write");
                }
            }
            Output::Record(v) => {
                w.write_record(["key", "value"]).expect("in-memory write");
                let mut pairs = Vec::new();
                flatten("", v, &mut pairs);
                for (k, v) in pairs {
                    w.write_record([k, v]).expect("in-memory write");
                }
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 csv")
    }

    fn pretty(&self) -> String {
        match self {
            Output::Table(rows) => {
                let flat: Vec<Vec<(String, String)>> = rows
                    .iter()
                    .map(|r| flatten_map(r).into_iter().map(|(k, v)| (k, short(&v))).collect())
                    .collect();
                let Some(first) = flat.first() else { return String::new() };
                let headers: Vec<&str> = first.iter().map(|(k, _)| k.as_str()).collect();
                let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
                for row in &flat {
                    for (i, (_, v)) in row.iter().enumerate() {
                        widths[i] = widths[i].max(v.chars().count());
                    }
                }
                let line = |cells: Vec<&str>| -> String {
                    let padded: Vec<String> =
                        cells.iter().zip(&widths).map(|(c, &w)| format!("{c:>w$}")).collect();
                    padded.join("  ").trim_end().to_string() + "\n"
                };
                let mut s = line(headers.clone());
                for row in &flat {
                    s += &line(row.iter().map(|(_, v)| v.as_str()).collect());
                }
                s
            }
            Output::Record(v) => {
                let mut pairs = Vec::new();
                flatten("", v, &mut pairs);
                let width = pairs.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
                pairs.iter().map(|(k, v)| format!("{k:<width$}  {}\n", short(v))).collect()
            }
        }
    }
}

fn flatten_map(m: &Map<String, Value>) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for (k, v) in m {
        flatten(k, v, &mut out);
    }
    out
}

/// Dotted-path leaves; arrays use `[i]`.
pub fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(m) => {
            for (k, child) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, child, out);
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// Six significant digits for numeric strings, anything else unchanged.
fn short(s: &str) -> String {
    match s.parse::<f64>() {
        Ok(x) if s.contains('.') || s.contains('e') || s.contains('E') => sig6(x),
        _ => s.to_string(),
    }
}

pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&exp) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn significant_digits() {
        assert_eq!(sig6(0.20710678118654752), "0.207107");
        assert_eq!(sig6(12345.678), "12345.7");
        assert_eq!(sig6(1.0), "1");
        assert_eq!(sig6(1.5e-7), "1.50000e-7");
        assert_eq!(sig6(-0.153281), "-0.153281");
    }

    #[test]
    fn csv_and_json_share_numbers() {
        let out = Output::Record(json!({"a": 0.1 + 0.2, "b": {"c": [1, 2.5]}, "d": "x"}));
        let csv = out.render(Format::Csv);
        assert!(csv.contains("a,0.30000000000000004"));
        assert!(csv.contains("b.c[1],2.5"));
        assert!(out.render(Format::Json).contains("0.30000000000000004"));
    }

    #[test]
    fn table_rendering() {
        #[derive(Serialize)]
        struct Row {
            phi: f64,
            c: f64,
        }
        let out = Output::table(&[Row { phi: 0.5, c: 0.25 }, Row { phi: 1.0, c: 0.125 }]).unwrap();
        assert_eq!(out.render(Format::Csv), "phi,c\n0.5,0.25\n1.0,0.125\n");
        let pretty = out.render(Format::Pretty);
        assert_eq!(pretty.lines().count(), 3);
        assert!(pretty.starts_with("phi"));
    }
}
