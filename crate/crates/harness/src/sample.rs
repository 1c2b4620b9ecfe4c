//! Sample file loader for the replay and model generation methods.
//!
//! Format: UTF-8 CSV with the exact header `sensor_id,timestamp_ms,value`,
//! one observation per row. Values parse as integers, floats, or quoted
//! strings (`"..."`, no embedded quotes). Non-finite floats and empty
//! strings are rejected. Errors name the offending line.

use std::path::Path;

use tsbench_core::{Timestamp, Value};

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error("cannot read sample {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line 1: expected header `sensor_id,timestamp_ms,value`")]
    BadHeader,
    #[error("line {line}: {reason}")]
    BadRow { line: usize, reason: String },
    #[error("sample file has no data rows")]
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePoint {
    pub sensor: String,
    pub timestamp_ms: Timestamp,
    pub value: Value,
}

pub fn load_sample(path: &Path) -> Result<Vec<SamplePoint>, SampleError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| SampleError::Io { path: path.display().to_string(), source })?;
    parse_sample(&text)
}

pub fn parse_sample(text: &str) -> Result<Vec<SamplePoint>, SampleError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "sensor_id,timestamp_ms,value" => {}
        _ => return Err(SampleError::BadHeader),
    }

    let mut out = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let mut fields = raw.splitn(3, ',');
        let (sensor, ts, value) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), Some(c)) => (a.trim(), b.trim(), c.trim()),
            _ => {
                return Err(SampleError::BadRow {
                    line,
                    reason: "expected 3 comma-separated fields".into(),
                })
            }
        };
        if sensor.is_empty() {
            return Err(SampleError::BadRow { line, reason: "empty sensor_id".into() });
        }
        let timestamp_ms: i64 = ts.parse().map_err(|e| SampleError::BadRow {
            line,
            reason: format!("bad timestamp `{ts}`: {e}"),
        })?;
        let value = parse_value(value)
            .map_err(|reason| SampleError::BadRow { line, reason })?;
        out.push(SamplePoint { sensor: sensor.to_string(), timestamp_ms, value });
    }
    if out.is_empty() {
        return Err(SampleError::Empty);
    }
    Ok(out)
}

fn parse_value(text: &str) -> Result<Value, String> {
    if let Some(stripped) = text.strip_prefix('"') {
        let inner = stripped
            .strip_suffix('"')
            .ok_or_else(|| format!("unterminated quoted string `{text}`"))?;
        if inner.contains('"') {
            return Err("embedded quotes are not supported".into());
        }
        if inner.is_empty() {
            return Err("empty string values are not allowed".into());
        }
        return Ok(Value::Text(inner.to_string()));
    }
    if let Ok(i) = text.parse::<i64>() {
        return Ok(Value::Integer(i));
    }
    match text.parse::<f64>() {
        Ok(f) if f.is_finite() => Ok(Value::Float(f)),
        Ok(f) => Err(format!("non-finite value `{f}`")),
        Err(_) => Err(format!("cannot parse value `{text}` as integer, float or quoted string")),
    }
}

/// Numeric view of a loaded sample for model fitting. Integer values are
/// promoted; any string row is an error.
pub fn numeric_series(points: &[SamplePoint]) -> Result<Vec<(Timestamp, f64)>, SampleError> {
    points
        .iter()
        .enumerate()
        .map(|(i, p)| match p.value.as_f64() {
            Some(v) => Ok((p.timestamp_ms, v)),
            None => Err(SampleError::BadRow {
                line: i + 2,
                reason: "model fitting requires numeric values".into(),
            }),
        })
        .collect()
}
