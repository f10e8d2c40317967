//! JSON and CSV rendering of command results.

use std::collections::BTreeSet;
use std::io::{self, Write};

use serde_json::{Map, Value};

use crate::Format;

/// Renders a complete result document.
pub fn render(doc: &Value, format: Format) -> io::Result<String> {
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(doc)?;
            text.push('\n');
            Ok(text)
        }
        Format::Csv if doc.get("reports").is_some() => bound_rows(doc),
        Format::Csv => flat_row(doc),
    }
}

pub fn print(text: &str) -> io::Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(_) | Value::Number(_) => v.to_string(),
        _ => serde_json::to_string(v).expect("JSON values always serialize"),
    }
}

fn finish(writer: csv::Writer<Vec<u8>>) -> io::Result<String> {
    let bytes = writer.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(io::Error::other)
}

/// One header and one row: parameters first, then result fields.
fn flat_row(doc: &Value) -> io::Result<String> {
    let empty = Map::new();
    let obj = doc.as_object().unwrap_or(&empty);
    let params = obj.get("params").and_then(Value::as_object).unwrap_or(&empty);
    let mut header = vec!["command".to_string(), "version".to_string()];
    let mut row = vec![cell(&obj["command"]), cell(&obj["version"])];
    for (k, v) in params {
        header.push(k.clone());
        row.push(cell(v));
    }
    for (k, v) in obj {
        if !matches!(k.as_str(), "command" | "version" | "params") {
            header.push(k.clone());
            row.push(cell(v));
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    w.write_record(&row)?;
    finish(w)
}

/// `bound, <params>, mode, value, inputs-provenance`, one row per report.
fn bound_rows(doc: &Value) -> io::Result<String> {
    let reports: &[Value] = doc["reports"].as_array().map(Vec::as_slice).unwrap_or(&[]);
    let keys: BTreeSet<&str> = reports
        .iter()
        .filter_map(|r| r["params"].as_object())
        .flat_map(|m| m.keys().map(String::as_str))
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["bound"];
    header.extend(keys.iter().copied());
    header.extend(["mode", "value", "inputs-provenance"]);
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![cell(&r["name"])];
        row.extend(keys.iter().map(|k| cell(&r["params"][*k])));
        row.push(cell(&r["mode"]));
        row.push(cell(&r["value"]));
        let provenance: Vec<String> = r["inputs"]
            .as_array()
            .map(Vec::as_slice)
            .unwrap_or(&[])
            .iter()
            .map(|i| format!("{}={}:{}", cell(&i["name"]), cell(&i["value"]), cell(&i["source"])))
            .collect();
        row.push(provenance.join(";"));
        w.write_record(&row)?;
    }
    finish(w)
}
