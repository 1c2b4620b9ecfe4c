//! Reference query semantics: a linear scan over in-memory points.
//!
//! [`brute_force_query`] defines what each template returns; storage adapters
//! must produce identical rows (bit-exact values, same order) from their own
//! data paths, and the equivalence tests hold them to it.
//!
//! Semantics pinned here:
//! - ranges are inclusive on both ends;
//! - point rows are ordered by (sensor id, timestamp);
//! - aggregation emits one row per sensor per function (canonical function
//!   order), skipping sensors with no points in range; `avg` promotes to
//!   float and is an error over string sensors; `max`/`min` use total float
//!   order, integer order, or lexicographic byte order per kind;
//! - downsample buckets are `unit_ms` wide, aligned to the query start, and
//!   empty buckets are omitted; the bucket aggregate follows the query's
//!   `bucket_agg`;
//! - filtered returns the points whose own value satisfies the condition
//!   (see [`Condition`](crate::workload::query::Condition) for the
//!   comparison rules);
//! - per-sensor aggregation folds values in ascending timestamp order, so
//!   float sums are reproducible.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::point::{DataPoint, Timestamp, Value};
use crate::workload::query::{AggFn, QuerySpec, QueryTemplate};

/// One result row.
#[derive(Debug, Clone, PartialEq)]
pub enum Row {
    Point { sensor: Arc<str>, timestamp_ms: Timestamp, value: Value },
    Aggregate { sensor: Arc<str>, func: AggFn, value: Value },
    Bucket { sensor: Arc<str>, bucket_start_ms: Timestamp, value: Value },
}

impl Row {
    pub fn bits_eq(&self, other: &Row) -> bool {
        match (self, other) {
            (
                Row::Point { sensor: s1, timestamp_ms: t1, value: v1 },
                Row::Point { sensor: s2, timestamp_ms: t2, value: v2 },
            ) => s1 == s2 && t1 == t2 && v1.bits_eq(v2),
            (
                Row::Aggregate { sensor: s1, func: f1, value: v1 },
                Row::Aggregate { sensor: s2, func: f2, value: v2 },
            ) => s1 == s2 && f1 == f2 && v1.bits_eq(v2),
            (
                Row::Bucket { sensor: s1, bucket_start_ms: b1, value: v1 },
                Row::Bucket { sensor: s2, bucket_start_ms: b2, value: v2 },
            ) => s1 == s2 && b1 == b2 && v1.bits_eq(v2),
            _ => false,
        }
    }
}

/// Bit-exact equality of two result sets (same rows, same order).
pub fn rows_bits_eq(a: &[Row], b: &[Row]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.bits_eq(y))
}

/// Fold a nonempty, timestamp-ordered value sequence with `func`.
/// Returns `None` for an empty sequence.
pub fn aggregate(values: &[&Value], func: AggFn) -> Result<Option<Value>> {
    if values.is_empty() {
        return Ok(None);
    }
    let out = match func {
        AggFn::First => (*values.first().unwrap()).clone(),
        AggFn::Last => (*values.last().unwrap()).clone(),
        AggFn::Avg => {
            let mut sum = 0.0f64;
            for v in values {
                match v.as_f64() {
                    Some(x) => sum += x,
                    None => {
                        return Err(Error::MalformedQuery {
                            reason: "avg over a string sensor".into(),
                        })
                    }
                }
            }
            Value::Float(sum / values.len() as f64)
        }
        AggFn::Max | AggFn::Min => {
            let mut best = *values.first().unwrap();
            for v in &values[1..] {
                let replace = match (v, best) {
                    (Value::Float(a), Value::Float(b)) => {
                        let ord = a.total_cmp(b);
                        if func == AggFn::Max { ord.is_gt() } else { ord.is_lt() }
                    }
                    (Value::Integer(a), Value::Integer(b)) => {
                        if func == AggFn::Max { a > b } else { a < b }
                    }
                    (Value::Text(a), Value::Text(b)) => {
                        let ord = a.as_bytes().cmp(b.as_bytes());
                        if func == AggFn::Max { ord.is_gt() } else { ord.is_lt() }
                    }
                    // Kinds never mix within one sensor.
                    _ => false,
                };
                if replace {
                    best = v;
                }
            }
            best.clone()
        }
    };
    Ok(Some(out))
}

/// Evaluate `spec` over `points` by linear scan. This is the test oracle for
/// storage adapters and the reference for the template semantics.
pub fn brute_force_query(points: &[DataPoint], spec: &QuerySpec) -> Result<Vec<Row>> {
    spec.validate()?;
    let wanted: BTreeSet<&str> = spec.sensors.iter().map(|s| s.as_ref()).collect();
    let in_range = |p: &&DataPoint| {
        p.timestamp_ms >= spec.start_ms
            && p.timestamp_ms <= spec.end_ms
            && wanted.contains(p.sensor.as_ref())
    };

    match spec.template {
        QueryTemplate::TimeRange => {
            let mut hits: Vec<&DataPoint> = points.iter().filter(in_range).collect();
            hits.sort_by(|a, b| {
                (a.sensor.as_ref(), a.timestamp_ms).cmp(&(b.sensor.as_ref(), b.timestamp_ms))
            });
            Ok(hits
                .into_iter()
                .map(|p| Row::Point {
                    sensor: p.sensor.clone(),
                    timestamp_ms: p.timestamp_ms,
                    value: p.value.clone(),
                })
                .collect())
        }
        QueryTemplate::Filtered => {
            let cond = spec.condition.as_ref().unwrap();
            let mut hits: Vec<&DataPoint> =
                points.iter().filter(in_range).filter(|p| cond.matches(&p.value)).collect();
            hits.sort_by(|a, b| {
                (a.sensor.as_ref(), a.timestamp_ms).cmp(&(b.sensor.as_ref(), b.timestamp_ms))
            });
            Ok(hits
                .into_iter()
                .map(|p| Row::Point {
                    sensor: p.sensor.clone(),
                    timestamp_ms: p.timestamp_ms,
                    value: p.value.clone(),
                })
                .collect())
        }
        QueryTemplate::Aggregation => {
            let mut per_sensor: BTreeMap<&str, Vec<&DataPoint>> = BTreeMap::new();
            for p in points.iter().filter(in_range) {
                per_sensor.entry(p.sensor.as_ref()).or_default().push(p);
            }
            let mut rows = Vec::new();
            for (sensor, mut pts) in per_sensor {
                pts.sort_by_key(|p| p.timestamp_ms);
                let values: Vec<&Value> = pts.iter().map(|p| &p.value).collect();
                for func in &spec.agg_functions {
                    if let Some(value) = aggregate(&values, *func)? {
                        rows.push(Row::Aggregate { sensor: Arc::from(sensor), func: *func, value });
                    }
                }
            }
            Ok(rows)
        }
        QueryTemplate::Downsample => {
            let unit = spec.unit_ms;
            let mut buckets: BTreeMap<(&str, i64), Vec<&DataPoint>> = BTreeMap::new();
            for p in points.iter().filter(in_range) {
                let idx = (p.timestamp_ms - spec.start_ms) / unit;
                buckets.entry((p.sensor.as_ref(), idx)).or_default().push(p);
            }
            let mut rows = Vec::new();
            for ((sensor, idx), mut pts) in buckets {
                pts.sort_by_key(|p| p.timestamp_ms);
                let values: Vec<&Value> = pts.iter().map(|p| &p.value).collect();
                if let Some(value) = aggregate(&values, spec.bucket_agg)? {
                    rows.push(Row::Bucket {
                        sensor: Arc::from(sensor),
                        bucket_start_ms: spec.start_ms + idx * unit,
                        value,
                    });
                }
            }
            Ok(rows)
        }
    }
}
