//! Data point types: the unit of ingestion.

use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

/// Milliseconds since the Unix epoch.
pub type Timestamp = i64;

/// A typed sensor reading.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Integer(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Integer,
    Float,
    Text,
}

impl ValueKind {
    pub fn name(self) -> &'static str {
        match self {
            ValueKind::Integer => "integer",
            ValueKind::Float => "float",
            ValueKind::Text => "string",
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Integer(_) => ValueKind::Integer,
            Value::Float(_) => ValueKind::Float,
            Value::Text(_) => ValueKind::Text,
        }
    }

    /// Size of the value payload as serialized for ingestion accounting.
    /// Fixed 8 bytes for numerics, byte length for strings (floored at 1 so
    /// every ingested point contributes to the volume).
    pub fn encoded_size(&self) -> u64 {
        match self {
            Value::Integer(_) | Value::Float(_) => 8,
            Value::Text(s) => (s.len() as u64).max(1),
        }
    }

    /// Numeric view, promoting integers. `None` for strings.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Integer(v) => Some(*v as f64),
            Value::Float(v) => Some(*v),
            Value::Text(_) => None,
        }
    }

    /// Bit-exact equality: floats compare by bit pattern, so NaNs and signed
    /// zeros round-trip checks are meaningful.
    pub fn bits_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Integer(a), Value::Integer(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => a.to_bits() == b.to_bits(),
            (Value::Text(a), Value::Text(b)) => a == b,
            _ => false,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Integer(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v}"),
            Value::Text(s) => write!(f, "\"{s}\""),
        }
    }
}

/// One `(sensor, timestamp, value)` observation.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPoint {
    pub sensor: Arc<str>,
    pub timestamp_ms: Timestamp,
    pub value: Value,
}

impl DataPoint {
    pub fn new(sensor: Arc<str>, timestamp_ms: Timestamp, value: Value) -> Self {
        DataPoint { sensor, timestamp_ms, value }
    }

    pub fn encoded_size(&self) -> u64 {
        self.value.encoded_size()
    }

    pub fn bits_eq(&self, other: &DataPoint) -> bool {
        self.sensor == other.sensor
            && self.timestamp_ms == other.timestamp_ms
            && self.value.bits_eq(&other.value)
    }
}
