//! CSV and JSON encodings of study reports.
//!
//! Floats are written with 17 significant digits, so parsing and re-emitting
//! reproduces the text exactly.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Number, Value};

use crate::error::{Error, Result};
use crate::study::{StudyReport, StudyRow};

pub const CSV_HEADER: [&str; 8] = ["level", "h", "dofs", "value", "reference", "error", "scaled_error", "seconds"];

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Rows as CSV with the fixed header.
pub fn to_csv(rows: &[StudyRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.level.to_string(),
            fmt_f64(r.h),
            r.dofs.to_string(),
            fmt_f64(r.value),
            fmt_opt(r.reference),
            fmt_opt(r.error),
            fmt_opt(r.scaled_error),
            fmt_f64(r.seconds),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

/// Parses CSV written by [`to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<StudyRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| Error::Parse { line: 1, message: e.to_string() })?
        .clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Parse { line: 1, message: format!("expected header {}", CSV_HEADER.join(",")) });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Parse { line, message: e.to_string() })?;
        let bad = |field: &str, v: &str| Error::Parse { line, message: format!("bad {field} value {v:?}") };
        let f = |k: usize| -> Result<f64> { rec[k].parse::<f64>().map_err(|_| bad(CSV_HEADER[k], &rec[k])) };
        let opt = |k: usize| -> Result<Option<f64>> { if rec[k].is_empty() { Ok(None) } else { f(k).map(Some) } };
        let u = |k: usize| -> Result<usize> { rec[k].parse::<usize>().map_err(|_| bad(CSV_HEADER[k], &rec[k])) };
        rows.push(StudyRow {
            level: u(0)?,
            h: f(1)?,
            dofs: u(2)?,
            value: f(3)?,
            reference: opt(4)?,
            error: opt(5)?,
            scaled_error: opt(6)?,
            seconds: f(7)?,
        });
    }
    Ok(rows)
}

fn widen(v: &mut Value) {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(x) = n.as_f64() {
                *n = fmt_f64(x).parse::<Number>().expect("formatted float is valid JSON");
            }
        }
        Value::Array(items) => items.iter_mut().for_each(widen),
        Value::Object(map) => map.values_mut().for_each(widen),
        _ => {}
    }
}

/// Pretty JSON with every float at 17 significant digits.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::InvalidArgument(format!("json: {e}")))?;
    widen(&mut v);
    serde_json::to_string_pretty(&v).map_err(|e| Error::InvalidArgument(format!("json: {e}")))
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })
}

pub fn report_to_json(report: &StudyReport) -> Result<String> {
    to_json(report)
}

pub fn report_from_json(text: &str) -> Result<StudyReport> {
    parse_json(text)
}
