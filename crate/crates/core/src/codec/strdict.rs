//! String value block: front-coded dictionary of the distinct strings in
//! sorted order, followed by one dictionary index per point.
//!
//! Dictionary entries store the byte length shared with the previous entry
//! and the remaining suffix, so runs of strings with common prefixes pack
//! tightly. Prefix lengths are byte counts over the UTF-8 encoding; entries
//! reassemble to the exact original bytes.

use alloc::string::String;
use alloc::vec::Vec;

use super::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};

fn common_prefix_len(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

pub(super) fn write_str_block(w: &mut BitWriter, values: &[&str]) {
    let mut dict: Vec<&str> = values.to_vec();
    dict.sort_unstable();
    dict.dedup();

    w.write_uvarint(dict.len() as u64);
    let mut prev: &[u8] = b"";
    for s in &dict {
        let bytes = s.as_bytes();
        let shared = common_prefix_len(prev, bytes);
        let suffix = &bytes[shared..];
        w.write_uvarint(shared as u64);
        w.write_uvarint(suffix.len() as u64);
        for b in suffix {
            w.write_bits(*b as u64, 8);
        }
        prev = bytes;
    }

    for v in values {
        let idx = dict.binary_search(v).expect("value is in its own dictionary");
        w.write_uvarint(idx as u64);
    }
}

pub(super) fn read_str_block(r: &mut BitReader<'_>, count: usize) -> Result<Vec<String>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let dict_len = r.read_uvarint()? as usize;
    if dict_len == 0 || dict_len > count {
        return Err(Error::CorruptSegment { what: "string dictionary size" });
    }
    let mut dict: Vec<String> = Vec::with_capacity(dict_len);
    let mut prev: Vec<u8> = Vec::new();
    for _ in 0..dict_len {
        let shared = r.read_uvarint()? as usize;
        let suffix_len = r.read_uvarint()? as usize;
        if shared > prev.len() {
            return Err(Error::CorruptSegment { what: "string prefix length" });
        }
        let mut bytes = prev[..shared].to_vec();
        for _ in 0..suffix_len {
            bytes.push(r.read_bits(8)? as u8);
        }
        prev = bytes.clone();
        let s = String::from_utf8(bytes)
            .map_err(|_| Error::CorruptSegment { what: "string dictionary utf-8" })?;
        dict.push(s);
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let idx = r.read_uvarint()? as usize;
        let s = dict.get(idx).ok_or(Error::CorruptSegment { what: "string index" })?;
        out.push(s.clone());
    }
    Ok(out)
}
