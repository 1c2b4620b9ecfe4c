//! XOR float block: per-value XOR against the previous value with
//! leading/trailing-zero windows, plus a raw escape that bounds the worst
//! case on incompressible input.
//!
//! Per value after the first (stored as raw 64 bits):
//!
//! ```text
//! '0'                                       XOR == 0 (repeat)
//! '10'  + window-width meaningful bits      fits the previous window
//! '110' + 5b lead + 6b width + width bits   opens a new window (width <= 52)
//! '111' + 64 raw value bits                 escape
//! ```
//!
//! The encoder picks the cheapest valid branch, so a random 64-bit value
//! costs at most 67 bits instead of the unbounded classic scheme.

use alloc::vec::Vec;

use super::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};

const NO_WINDOW: u8 = u8::MAX;

#[derive(Clone, Copy)]
struct Window {
    lead: u8,
    trail: u8,
    width: u8,
}

pub(super) fn write_xor_block(w: &mut BitWriter, values: &[f64]) {
    let mut prev = match values.first() {
        Some(v) => {
            let bits = v.to_bits();
            w.write_bits(bits, 64);
            bits
        }
        None => return,
    };
    let mut win = Window { lead: NO_WINDOW, trail: 0, width: 0 };
    for v in &values[1..] {
        let bits = v.to_bits();
        let xor = bits ^ prev;
        prev = bits;
        if xor == 0 {
            w.write_bit(false);
            continue;
        }
        let lead = xor.leading_zeros() as u8;
        let trail = xor.trailing_zeros() as u8;

        let same_ok = win.lead != NO_WINDOW && lead >= win.lead && trail >= win.trail;
        let cost_same = if same_ok { 2 + win.width as u32 } else { u32::MAX };

        let new_lead = lead.min(31);
        let new_width = 64 - new_lead - trail;
        let cost_new = if new_width <= 52 { 3 + 5 + 6 + new_width as u32 } else { u32::MAX };

        let cost_raw = 3 + 64;

        if cost_same <= cost_new && cost_same <= cost_raw {
            w.write_bits(0b10, 2);
            w.write_bits(xor >> win.trail, win.width);
        } else if cost_new <= cost_raw {
            w.write_bits(0b110, 3);
            w.write_bits(new_lead as u64, 5);
            w.write_bits(new_width as u64, 6);
            w.write_bits(xor >> trail, new_width);
            win = Window { lead: new_lead, trail, width: new_width };
        } else {
            w.write_bits(0b111, 3);
            w.write_bits(bits, 64);
        }
    }
}

pub(super) fn read_xor_block(r: &mut BitReader<'_>, count: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    let mut prev = r.read_bits(64)?;
    out.push(f64::from_bits(prev));
    let mut win = Window { lead: NO_WINDOW, trail: 0, width: 0 };
    for _ in 1..count {
        if !r.read_bit()? {
            out.push(f64::from_bits(prev));
            continue;
        }
        if !r.read_bit()? {
            // Previous window.
            if win.lead == NO_WINDOW {
                return Err(Error::CorruptSegment { what: "xor window reuse before definition" });
            }
            let xor = r.read_bits(win.width)? << win.trail;
            prev ^= xor;
        } else if !r.read_bit()? {
            // New window.
            let lead = r.read_bits(5)? as u8;
            let width = r.read_bits(6)? as u8;
            if width == 0 || lead + width > 64 {
                return Err(Error::CorruptSegment { what: "xor window out of range" });
            }
            let trail = 64 - lead - width;
            let xor = r.read_bits(width)? << trail;
            prev ^= xor;
            win = Window { lead, trail, width };
        } else {
            // Raw escape.
            prev = r.read_bits(64)?;
        }
        out.push(f64::from_bits(prev));
    }
    Ok(out)
}
