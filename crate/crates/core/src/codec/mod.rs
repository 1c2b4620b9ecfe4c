//! Lossless segment codecs.
//!
//! A segment is a run of `(timestamp, value)` pairs for one sensor with a
//! homogeneous value kind. Codecs are chosen per kind: timestamps are always
//! delta-of-delta encoded, integer values are zigzag varint deltas, floats
//! use XOR leading/trailing-zero encoding and strings a front-coded
//! dictionary. The `none` codec stores everything raw and exists as the
//! incompressible baseline.
//!
//! Payload layout for the compressing codecs (one MSB-first bit stream):
//!
//! ```text
//! uvarint point-count | timestamp block | value block
//! ```
//!
//! and for `none` (plain bytes):
//!
//! ```text
//! u32le point-count | u8 kind | per point: i64le timestamp + raw value
//! ```
//!
//! where a raw value is an i64le, a f64 bit pattern (u64le), or a u32le
//! length followed by UTF-8 bytes. All codecs are exact: decode(encode(x))
//! reproduces timestamps and value bit patterns identically.

mod bits;
mod intdelta;
mod strdict;
mod timestamps;
mod xor;

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::point::{Timestamp, Value, ValueKind};
use bits::{BitReader, BitWriter};

/// Segment codec identifier, stable across releases (stored in file headers).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodecId {
    None = 0,
    DeltaVarint = 1,
    XorFloat = 2,
    DictString = 3,
}

impl CodecId {
    pub fn from_u8(v: u8) -> Option<CodecId> {
        match v {
            0 => Some(CodecId::None),
            1 => Some(CodecId::DeltaVarint),
            2 => Some(CodecId::XorFloat),
            3 => Some(CodecId::DictString),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            CodecId::None => "none",
            CodecId::DeltaVarint => "delta_varint",
            CodecId::XorFloat => "xor_float",
            CodecId::DictString => "dict_string",
        }
    }

    /// The compressing codec for a value kind.
    pub fn for_kind(kind: ValueKind) -> CodecId {
        match kind {
            ValueKind::Integer => CodecId::DeltaVarint,
            ValueKind::Float => CodecId::XorFloat,
            ValueKind::Text => CodecId::DictString,
        }
    }

    pub fn accepts(self, kind: ValueKind) -> bool {
        match self {
            CodecId::None => true,
            CodecId::DeltaVarint => kind == ValueKind::Integer,
            CodecId::XorFloat => kind == ValueKind::Float,
            CodecId::DictString => kind == ValueKind::Text,
        }
    }
}

fn segment_kind(points: &[(Timestamp, Value)]) -> Result<Option<ValueKind>> {
    let mut kind = None;
    for (_, v) in points {
        match kind {
            None => kind = Some(v.kind()),
            Some(k) if k == v.kind() => {}
            Some(_) => return Err(Error::MixedKindSegment),
        }
    }
    Ok(kind)
}

/// Encode one segment. Errors on mixed kinds or a codec/kind mismatch.
pub fn encode_segment(points: &[(Timestamp, Value)], codec: CodecId) -> Result<Vec<u8>> {
    let kind = segment_kind(points)?;
    if let Some(kind) = kind {
        if !codec.accepts(kind) {
            return Err(Error::CodecMismatch { codec: codec.name(), kind: kind.name() });
        }
    }
    match codec {
        CodecId::None => Ok(encode_raw(points, kind)),
        _ => {
            let mut w = BitWriter::new();
            w.write_uvarint(points.len() as u64);
            let ts: Vec<Timestamp> = points.iter().map(|(t, _)| *t).collect();
            timestamps::write_ts_block(&mut w, &ts);
            match codec {
                CodecId::DeltaVarint => {
                    let values: Vec<i64> = points
                        .iter()
                        .map(|(_, v)| match v {
                            Value::Integer(i) => *i,
                            _ => unreachable!("kind checked above"),
                        })
                        .collect();
                    intdelta::write_int_block(&mut w, &values);
                }
                CodecId::XorFloat => {
                    let values: Vec<f64> = points
                        .iter()
                        .map(|(_, v)| match v {
                            Value::Float(f) => *f,
                            _ => unreachable!("kind checked above"),
                        })
                        .collect();
                    xor::write_xor_block(&mut w, &values);
                }
                CodecId::DictString => {
                    let values: Vec<&str> = points
                        .iter()
                        .map(|(_, v)| match v {
                            Value::Text(s) => s.as_str(),
                            _ => unreachable!("kind checked above"),
                        })
                        .collect();
                    strdict::write_str_block(&mut w, &values);
                }
                CodecId::None => unreachable!(),
            }
            Ok(w.finish())
        }
    }
}

/// Decode one segment encoded with `codec`.
pub fn decode_segment(bytes: &[u8], codec: CodecId) -> Result<Vec<(Timestamp, Value)>> {
    match codec {
        CodecId::None => decode_raw(bytes),
        _ => {
            let mut r = BitReader::new(bytes);
            let count = r.read_uvarint()? as usize;
            let ts = timestamps::read_ts_block(&mut r, count)?;
            let mut out = Vec::with_capacity(count);
            match codec {
                CodecId::DeltaVarint => {
                    for (t, v) in ts.into_iter().zip(intdelta::read_int_block(&mut r, count)?) {
                        out.push((t, Value::Integer(v)));
                    }
                }
                CodecId::XorFloat => {
                    for (t, v) in ts.into_iter().zip(xor::read_xor_block(&mut r, count)?) {
                        out.push((t, Value::Float(v)));
                    }
                }
                CodecId::DictString => {
                    for (t, v) in ts.into_iter().zip(strdict::read_str_block(&mut r, count)?) {
                        out.push((t, Value::Text(v)));
                    }
                }
                CodecId::None => unreachable!(),
            }
            Ok(out)
        }
    }
}

const RAW_KIND_INT: u8 = 0;
const RAW_KIND_FLOAT: u8 = 1;
const RAW_KIND_TEXT: u8 = 2;
const RAW_KIND_EMPTY: u8 = 0xff;

fn encode_raw(points: &[(Timestamp, Value)], kind: Option<ValueKind>) -> Vec<u8> {
    let mut out = Vec::with_capacity(5 + points.len() * 16);
    out.extend_from_slice(&(points.len() as u32).to_le_bytes());
    out.push(match kind {
        Some(ValueKind::Integer) => RAW_KIND_INT,
        Some(ValueKind::Float) => RAW_KIND_FLOAT,
        Some(ValueKind::Text) => RAW_KIND_TEXT,
        None => RAW_KIND_EMPTY,
    });
    for (t, v) in points {
        out.extend_from_slice(&t.to_le_bytes());
        match v {
            Value::Integer(i) => out.extend_from_slice(&i.to_le_bytes()),
            Value::Float(f) => out.extend_from_slice(&f.to_bits().to_le_bytes()),
            Value::Text(s) => {
                out.extend_from_slice(&(s.len() as u32).to_le_bytes());
                out.extend_from_slice(s.as_bytes());
            }
        }
    }
    out
}

fn decode_raw(bytes: &[u8]) -> Result<Vec<(Timestamp, Value)>> {
    let corrupt = |what| Error::CorruptSegment { what };
    let take = |bytes: &[u8], pos: &mut usize, n: usize| -> Result<Vec<u8>> {
        let end = pos.checked_add(n).ok_or(corrupt("raw length overflow"))?;
        if end > bytes.len() {
            return Err(corrupt("raw segment truncated"));
        }
        let slice = bytes[*pos..end].to_vec();
        *pos = end;
        Ok(slice)
    };

    let mut pos = 0usize;
    let count = u32::from_le_bytes(
        take(bytes, &mut pos, 4)?.try_into().map_err(|_| corrupt("raw count"))?,
    ) as usize;
    let kind = take(bytes, &mut pos, 1)?[0];
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let ts = i64::from_le_bytes(
            take(bytes, &mut pos, 8)?.try_into().map_err(|_| corrupt("raw timestamp"))?,
        );
        let value = match kind {
            RAW_KIND_INT => Value::Integer(i64::from_le_bytes(
                take(bytes, &mut pos, 8)?.try_into().map_err(|_| corrupt("raw int"))?,
            )),
            RAW_KIND_FLOAT => Value::Float(f64::from_bits(u64::from_le_bytes(
                take(bytes, &mut pos, 8)?.try_into().map_err(|_| corrupt("raw float"))?,
            ))),
            RAW_KIND_TEXT => {
                let len = u32::from_le_bytes(
                    take(bytes, &mut pos, 4)?.try_into().map_err(|_| corrupt("raw str len"))?,
                ) as usize;
                let s = String::from_utf8(take(bytes, &mut pos, len)?)
                    .map_err(|_| corrupt("raw str utf-8"))?;
                Value::Text(s)
            }
            _ => return Err(corrupt("raw kind byte")),
        };
        out.push((ts, value));
    }
    Ok(out)
}

/// Raw byte size of a segment: 8 bytes per timestamp plus the value payload.
pub fn raw_size(points: &[(Timestamp, Value)]) -> u64 {
    points.iter().map(|(_, v)| 8 + v.encoded_size()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Xoshiro256;
    use alloc::format;
    use alloc::string::ToString;

    fn constant_float_segment(n: usize) -> Vec<(Timestamp, Value)> {
        (0..n).map(|i| (1_700_000_000_000 + i as i64 * 1000, Value::Float(5.0))).collect()
    }

    #[test]
    fn constant_series_compresses_below_five_percent() {
        // 1000 evenly spaced points at a constant 5.0: 16 KB raw.
        let points = constant_float_segment(1000);
        assert_eq!(raw_size(&points), 16_000);
        let encoded = encode_segment(&points, CodecId::XorFloat).unwrap();
        assert!(
            (encoded.len() as f64) < 0.05 * 16_000.0,
            "constant series encoded to {} bytes",
            encoded.len()
        );
        let decoded = decode_segment(&encoded, CodecId::XorFloat).unwrap();
        assert_eq!(decoded, points);
    }

    #[test]
    fn empty_segment_is_header_only() {
        for codec in [CodecId::None, CodecId::DeltaVarint, CodecId::XorFloat, CodecId::DictString]
        {
            let encoded = encode_segment(&[], codec).unwrap();
            assert!(encoded.len() <= 5, "{}: {} bytes", codec.name(), encoded.len());
            assert_eq!(decode_segment(&encoded, codec).unwrap(), Vec::new());
        }
    }

    #[test]
    fn random_floats_encode_near_raw_size() {
        // Incompressible input: random value bits and random irregular gaps.
        // Frozen measurement: the encoded size stays within [90%, 110%] of
        // the 16-byte-per-point raw form.
        let mut rng = Xoshiro256::from_seed(17);
        let mut ts = 0i64;
        let mut points = Vec::new();
        for _ in 0..10_000 {
            ts += (rng.below(1 << 40) + 1) as i64;
            points.push((ts, Value::Float(f64::from_bits(rng.next_u64()))));
        }
        let raw = raw_size(&points) as f64;
        let encoded = encode_segment(&points, CodecId::XorFloat).unwrap();
        let ratio = encoded.len() as f64 / raw;
        assert!((0.90..=1.10).contains(&ratio), "encoded/raw = {ratio:.4}");
        let decoded = decode_segment(&encoded, CodecId::XorFloat).unwrap();
        assert_eq!(decoded.len(), points.len());
        for ((t1, v1), (t2, v2)) in points.iter().zip(&decoded) {
            assert_eq!(t1, t2);
            assert!(v1.bits_eq(v2));
        }
    }

    #[test]
    fn none_codec_is_at_least_raw_size() {
        let points = constant_float_segment(100);
        let encoded = encode_segment(&points, CodecId::None).unwrap();
        assert!(encoded.len() as u64 >= raw_size(&points));

        let strings: Vec<(Timestamp, Value)> =
            (0..50).map(|i| (i, Value::Text(format!("value_{i}")))).collect();
        let encoded = encode_segment(&strings, CodecId::None).unwrap();
        assert!(encoded.len() as u64 >= raw_size(&strings));
        assert_eq!(decode_segment(&encoded, CodecId::None).unwrap(), strings);
    }

    #[test]
    fn kind_mismatch_is_an_error() {
        let strings = [(0i64, Value::Text("a".to_string()))];
        assert_eq!(
            encode_segment(&strings, CodecId::XorFloat),
            Err(Error::CodecMismatch { codec: "xor_float", kind: "string" })
        );
        let ints = [(0i64, Value::Integer(1))];
        assert!(encode_segment(&ints, CodecId::DictString).is_err());
        let mixed = [(0i64, Value::Integer(1)), (1, Value::Float(2.0))];
        assert_eq!(encode_segment(&mixed, CodecId::DeltaVarint), Err(Error::MixedKindSegment));
    }

    #[test]
    fn integer_and_string_round_trips() {
        let ints: Vec<(Timestamp, Value)> =
            (0..500).map(|i| (i * 100, Value::Integer(1000 + (i % 13) - 6))).collect();
        let encoded = encode_segment(&ints, CodecId::DeltaVarint).unwrap();
        assert_eq!(decode_segment(&encoded, CodecId::DeltaVarint).unwrap(), ints);

        let strs: Vec<(Timestamp, Value)> = (0..200)
            .map(|i| (i * 10, Value::Text(format!("room_{}", i % 5))))
            .collect();
        let encoded = encode_segment(&strs, CodecId::DictString).unwrap();
        assert_eq!(decode_segment(&encoded, CodecId::DictString).unwrap(), strs);
    }

    #[test]
    fn truncated_payload_is_reported_corrupt() {
        let points = constant_float_segment(10);
        for codec in [CodecId::None, CodecId::XorFloat] {
            let encoded = encode_segment(&points, codec).unwrap();
            let cut = &encoded[..encoded.len() / 2];
            assert!(matches!(
                decode_segment(cut, codec),
                Err(Error::CorruptSegment { .. })
            ));
        }
    }
}
