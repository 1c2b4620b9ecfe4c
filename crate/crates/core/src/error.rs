//! Error type shared by the core modules.

use alloc::string::String;
use core::fmt;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A distribution or generator parameter violates its constraints. The
    /// field name identifies the offending parameter.
    InvalidParam { field: String, reason: String },
    /// A sample-driven generator was given an empty sample.
    EmptySample,
    /// Model fitting needs at least two points.
    TooFewPoints { needed: usize, got: usize },
    /// Model fitting requires numeric (finite) values.
    NonNumericSample,
    /// A query was requested before any data point was ingested.
    EmptyWindow,
    /// Segment codec applied to a value kind it cannot encode.
    CodecMismatch { codec: &'static str, kind: &'static str },
    /// A segment holds more than one value kind.
    MixedKindSegment,
    /// Segment payload failed to decode.
    CorruptSegment { what: &'static str },
    /// A query spec violates its template's invariants.
    MalformedQuery { reason: String },
    /// Record allocation preconditions (k >= 2, N_p >= 2k-1) violated.
    BadAllocation { reason: String },
    /// A metric was asked for an invalid run (non-positive duration, ...).
    InvalidRun { reason: String },
    /// Storage component capacity is smaller than the ingested volume.
    CapacityExceeded { capacity_bytes: f64, ingested_bytes: f64 },
    /// Compression ratio is undefined for zero on-disk bytes.
    ZeroDiskBytes,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParam { field, reason } => {
                write!(f, "invalid parameter `{field}`: {reason}")
            }
            Error::EmptySample => write!(f, "sample set is empty"),
            Error::TooFewPoints { needed, got } => {
                write!(f, "model fit needs at least {needed} points, got {got}")
            }
            Error::NonNumericSample => write!(f, "model fit requires numeric sample values"),
            Error::EmptyWindow => write!(f, "no data ingested yet; observed time window is empty"),
            Error::CodecMismatch { codec, kind } => {
                write!(f, "codec `{codec}` cannot encode `{kind}` values")
            }
            Error::MixedKindSegment => write!(f, "segment mixes value kinds"),
            Error::CorruptSegment { what } => write!(f, "corrupt segment payload: {what}"),
            Error::MalformedQuery { reason } => write!(f, "malformed query: {reason}"),
            Error::BadAllocation { reason } => write!(f, "bad record allocation: {reason}"),
            Error::InvalidRun { reason } => write!(f, "invalid run: {reason}"),
            Error::CapacityExceeded { capacity_bytes, ingested_bytes } => write!(
                f,
                "storage capacity {capacity_bytes} B is below ingested volume {ingested_bytes} B"
            ),
            Error::ZeroDiskBytes => write!(f, "compression ratio undefined for zero disk bytes"),
        }
    }
}

impl core::error::Error for Error {}
