//! Deterministic file I/O: JSON and CSV writers that format every float
//! with 17 significant digits (exact f64 round-trip), and measure file
//! loaders.
//!
//! Identical inputs must produce byte-identical outputs so experiment
//! results can be diffed; that rules out the default shortest-float
//! printing, which is round-trip exact but makes "how many digits" part
//! of the value.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{MongeError, Result};
use crate::measures::{DiscreteMeasure, MeasureAdjustment, MeasureData};
use crate::verification::TrendRow;

/// Serialize a float with 17 significant digits — enough to reconstruct
/// the exact bit pattern on parse.
pub fn fmt_float(value: f64) -> String {
    format!("{value:.16e}")
}

struct FullPrecisionFormatter;

impl serde_json::ser::Formatter for FullPrecisionFormatter {
    fn write_f64<W: ?Sized + std::io::Write>(
        &mut self,
        writer: &mut W,
        value: f64,
    ) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + std::io::Write>(
        &mut self,
        writer: &mut W,
        value: f32,
    ) -> std::io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
}

/// JSON with every float at full round-trip precision. Compact layout;
/// field order follows the type's serialization order, so equal values
/// serialize to equal bytes.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecisionFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| MongeError::Io(format!("serialization failed: {e}")))?;
    String::from_utf8(buf).map_err(|e| MongeError::Io(format!("non-utf8 JSON output: {e}")))
}

/// Write a value as full-precision JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = to_json_string(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Render the trend table as CSV (header plus one row per ε).
pub fn render_run_csv(rows: &[TrendRow]) -> String {
    let mut out = String::new();
    out.push_str(&TrendRow::COLUMNS.join(","));
    out.push('\n');
    for r in rows {
        let fields = [
            fmt_float(r.epsilon),
            r.j.to_string(),
            r.net_size.to_string(),
            fmt_float(r.fidelity),
            fmt_float(r.transport),
            fmt_float(r.cardinality),
            fmt_float(r.total),
            fmt_float(r.w1_nu_mu2),
            fmt_float(r.primary_cost),
            fmt_float(r.secondary_cost),
            fmt_float(r.splitting_index),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_run_csv(path: &Path, rows: &[TrendRow]) -> Result<()> {
    fs::write(path, render_run_csv(rows))?;
    Ok(())
}

/// Load a measure from a `.json` file (the measure schema) or a `.csv`
/// file with header `x1,...,xn,w`. Points are canonicalized (sorted,
/// duplicates merged, weights normalized); the adjustment report says
/// whether the file was already clean.
pub fn load_measure(path: &Path) -> Result<(DiscreteMeasure, MeasureAdjustment)> {
    let text = fs::read_to_string(path)
        .map_err(|e| MongeError::Io(format!("{}: {e}", path.display())))?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    let data = if ext == "csv" {
        parse_measure_csv(&text).map_err(|e| match e {
            MongeError::InvalidMeasure(msg) => {
                MongeError::InvalidMeasure(format!("{}: {msg}", path.display()))
            }
            other => other,
        })?
    } else {
        serde_json::from_str::<MeasureData>(&text).map_err(|e| {
            MongeError::InvalidMeasure(format!("{}: {e}", path.display()))
        })?
    };
    DiscreteMeasure::from_data(data)
}

/// Parse the CSV measure format: header `x1,...,xn,w`, one atom per row.
fn parse_measure_csv(text: &str) -> Result<MeasureData> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| MongeError::InvalidMeasure("empty measure file".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 2 || cols.last() != Some(&"w") {
        return Err(MongeError::InvalidMeasure(
            "header must be x1,...,xn,w".into(),
        ));
    }
    let dim = cols.len() - 1;
    for (k, c) in cols[..dim].iter().enumerate() {
        let expected = format!("x{}", k + 1);
        if *c != expected {
            return Err(MongeError::InvalidMeasure(format!(
                "line 1: expected column {expected}, found {c}"
            )));
        }
    }
    let mut points = Vec::new();
    let mut weights = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != dim + 1 {
            return Err(MongeError::InvalidMeasure(format!(
                "line {}: expected {} fields, found {}",
                lineno + 1,
                dim + 1,
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(dim + 1);
        for f in &fields {
            let v: f64 = f.parse().map_err(|_| {
                MongeError::InvalidMeasure(format!(
                    "line {}: cannot parse '{f}' as a number",
                    lineno + 1
                ))
            })?;
            row.push(v);
        }
        let w = row.pop().unwrap();
        points.push(row);
        weights.push(w);
    }
    Ok(MeasureData {
        dim,
        points,
        weights,
    })
}

/// Save a measure as full-precision JSON.
pub fn save_measure(path: &Path, measure: &DiscreteMeasure) -> Result<()> {
    write_json(path, measure)
}
