//! Integer value block: first value, then per-point deltas, all zigzag
//! varints. Wrapping arithmetic keeps the round trip exact across the full
//! i64 range.

use alloc::vec::Vec;

use super::bits::{zigzag_decode, zigzag_encode, BitReader, BitWriter};
use crate::error::Result;

pub(super) fn write_int_block(w: &mut BitWriter, values: &[i64]) {
    let mut prev = match values.first() {
        Some(v) => {
            w.write_uvarint(zigzag_encode(*v));
            *v
        }
        None => return,
    };
    for v in &values[1..] {
        w.write_uvarint(zigzag_encode(v.wrapping_sub(prev)));
        prev = *v;
    }
}

pub(super) fn read_int_block(r: &mut BitReader<'_>, count: usize) -> Result<Vec<i64>> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    let mut prev = zigzag_decode(r.read_uvarint()?);
    out.push(prev);
    for _ in 1..count {
        prev = prev.wrapping_add(zigzag_decode(r.read_uvarint()?));
        out.push(prev);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_extremes() {
        let values = [0i64, 1, -1, i64::MAX, i64::MIN, 42, 42];
        let mut w = BitWriter::new();
        write_int_block(&mut w, &values);
        let bytes = w.finish();
        let mut r = BitReader::new(&bytes);
        assert_eq!(read_int_block(&mut r, values.len()).unwrap(), values);
    }

    #[test]
    fn small_deltas_pack_to_one_byte() {
        let values: Vec<i64> = (0..1000).map(|i| 500 + (i % 7)).collect();
        let mut w = BitWriter::new();
        write_int_block(&mut w, &values);
        assert!(w.finish().len() < 1100);
    }
}
