//! Delta-of-delta timestamp block, shared by all compressing codecs.
//!
//! Layout: zigzag varint of the first timestamp, zigzag varint of the first
//! delta, then one variable-width field per remaining point keyed on the
//! delta-of-delta:
//!
//! ```text
//! '0'                          dod = 0
//! '10'   + 7 bits (dod + 63)   dod in [-63, 64]
//! '110'  + 9 bits (dod + 255)  dod in [-255, 256]
//! '1110' + 12 bits (dod+2047)  dod in [-2047, 2048]
//! '1111' + 64 bits raw         anything else
//! ```
//!
//! Deltas use wrapping arithmetic so the round trip is exact for the full
//! i64 range.

use alloc::vec::Vec;

use super::bits::{zigzag_decode, zigzag_encode, BitReader, BitWriter};
use crate::error::Result;
use crate::point::Timestamp;

pub(super) fn write_ts_block(w: &mut BitWriter, ts: &[Timestamp]) {
    if ts.is_empty() {
        return;
    }
    w.write_uvarint(zigzag_encode(ts[0]));
    if ts.len() == 1 {
        return;
    }
    let mut prev_delta = ts[1].wrapping_sub(ts[0]);
    w.write_uvarint(zigzag_encode(prev_delta));
    for win in ts[1..].windows(2) {
        let delta = win[1].wrapping_sub(win[0]);
        let dod = delta.wrapping_sub(prev_delta);
        prev_delta = delta;
        match dod {
            0 => w.write_bit(false),
            -63..=64 => {
                w.write_bits(0b10, 2);
                w.write_bits((dod + 63) as u64, 7);
            }
            -255..=256 => {
                w.write_bits(0b110, 3);
                w.write_bits((dod + 255) as u64, 9);
            }
            -2047..=2048 => {
                w.write_bits(0b1110, 4);
                w.write_bits((dod + 2047) as u64, 12);
            }
            _ => {
                w.write_bits(0b1111, 4);
                w.write_bits(dod as u64, 64);
            }
        }
    }
}

pub(super) fn read_ts_block(r: &mut BitReader<'_>, count: usize) -> Result<Vec<Timestamp>> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    let first = zigzag_decode(r.read_uvarint()?);
    out.push(first);
    if count == 1 {
        return Ok(out);
    }
    let mut delta = zigzag_decode(r.read_uvarint()?);
    out.push(first.wrapping_add(delta));
    for _ in 2..count {
        let dod = if !r.read_bit()? {
            0
        } else if !r.read_bit()? {
            r.read_bits(7)? as i64 - 63
        } else if !r.read_bit()? {
            r.read_bits(9)? as i64 - 255
        } else if !r.read_bit()? {
            r.read_bits(12)? as i64 - 2047
        } else {
            r.read_bits(64)? as i64
        };
        delta = delta.wrapping_add(dod);
        let next = out.last().unwrap().wrapping_add(delta);
        out.push(next);
    }
    Ok(out)
}
