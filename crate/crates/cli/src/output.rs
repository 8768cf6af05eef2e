//! CSV and JSON-lines record writers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use copfrac::IntegralResult;
use serde_json::{Map, Value};

use crate::schema::Format;

/// One evaluated job or sweep cell.
#[derive(Debug, Clone)]
pub struct Row {
    pub job: Option<usize>,
    pub kind: Option<&'static str>,
    pub swept: Vec<(String, Value)>,
    pub result: IntegralResult,
    pub wall_time_ms: f64,
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_value(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.to_string(),
            None => n.as_f64().map(fmt_f64).unwrap_or_else(|| n.to_string()),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn open(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes `rows`; every row must carry the same columns.
pub fn write_rows(out: Box<dyn Write>, format: Format, rows: &[Row]) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(out, rows),
        Format::Json => write_json(out, rows),
    }
}

fn header(row: &Row) -> Vec<String> {
    let mut h = Vec::new();
    if row.job.is_some() {
        h.push("job".to_string());
    }
    if row.kind.is_some() {
        h.push("kind".to_string());
    }
    h.extend(row.swept.iter().map(|(p, _)| p.clone()));
    h.extend(["value", "error_estimate", "evaluations", "wall_time_ms"].map(String::from));
    h
}

fn write_csv(out: Box<dyn Write>, rows: &[Row]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if let Some(first) = rows.first() {
        w.write_record(header(first))?;
    }
    for r in rows {
        let mut rec = Vec::new();
        if let Some(j) = r.job {
            rec.push(j.to_string());
        }
        if let Some(k) = r.kind {
            rec.push(k.to_string());
        }
        rec.extend(r.swept.iter().map(|(_, v)| fmt_value(v)));
        rec.push(fmt_f64(r.result.value));
        rec.push(fmt_f64(r.result.error_estimate));
        rec.push(r.result.evaluations.to_string());
        rec.push(format!("{:.3}", r.wall_time_ms));
        w.write_record(rec)?;
    }
    w.flush()
}

fn write_json(mut out: Box<dyn Write>, rows: &[Row]) -> io::Result<()> {
    for r in rows {
        let mut m = Map::new();
        if let Some(j) = r.job {
            m.insert("job".into(), j.into());
        }
        if let Some(k) = r.kind {
            m.insert("kind".into(), k.into());
        }
        for (p, v) in &r.swept {
            m.insert(p.clone(), v.clone());
        }
        m.insert("value".into(), r.result.value.into());
        m.insert("error_estimate".into(), r.result.error_estimate.into());
        m.insert("evaluations".into(), r.result.evaluations.into());
        m.insert("wall_time_ms".into(), ((r.wall_time_ms * 1000.0).round() / 1000.0).into());
        serde_json::to_writer(&mut out, &Value::Object(m))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shortest_round_trip() {
        for x in [0.1, 1.0 / 3.0, 3.0 * std::f64::consts::PI / 32.0, 1e-300, 2.5e17] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_value(&Value::from(64)), "64");
        assert_eq!(fmt_value(&Value::from("frank")), "frank");
    }
}
