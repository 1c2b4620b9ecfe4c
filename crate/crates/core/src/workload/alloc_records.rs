//! Per-client record allocation for the scalability test.
//!
//! With `k` clients and `N_p` records, each of the `k - 1` standard clients
//! is assigned `floor(2 N_p / (2k - 1))` records and the remaining scale-out
//! client takes the remainder, which lands next to `N_p / (2k - 1)`. The
//! floor keeps conservation exact and the scale-out share smallest.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    /// Total records, `N_p`.
    pub total: u64,
    /// Record budget per client; the scale-out client is last.
    pub per_client: Vec<u64>,
    /// Index of the client that joins at the scale-out boundary.
    pub scale_out_client: usize,
}

impl Allocation {
    pub fn clients(&self) -> usize {
        self.per_client.len()
    }

    /// Combined budget of the standard (non-scale-out) clients.
    pub fn standard_total(&self) -> u64 {
        self.total - self.per_client[self.scale_out_client]
    }
}

pub fn allocate_records(total: u64, clients: u32) -> Result<Allocation> {
    if clients < 2 {
        return Err(Error::BadAllocation {
            reason: format!("scalability test needs at least 2 clients, got {clients}"),
        });
    }
    let k = clients as u64;
    if total < 2 * k - 1 {
        return Err(Error::BadAllocation {
            reason: format!("need at least 2k-1 = {} records for k = {k}, got {total}", 2 * k - 1),
        });
    }
    let share = 2 * total / (2 * k - 1);
    let mut per_client = alloc::vec![share; clients as usize - 1];
    per_client.push(total - share * (k - 1));
    Ok(Allocation { total, per_client, scale_out_client: clients as usize - 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_split() {
        // 2*1000/5 = 400 for the standard clients, 1000/5 = 200 for the rest.
        let alloc = allocate_records(1000, 3).unwrap();
        assert_eq!(alloc.per_client, [400, 400, 200]);
        assert_eq!(alloc.scale_out_client, 2);
        assert_eq!(alloc.standard_total(), 800);
    }

    #[test]
    fn minimal_instance() {
        let alloc = allocate_records(3, 2).unwrap();
        assert_eq!(alloc.per_client, [2, 1]);
    }

    #[test]
    fn conservation_with_rounding() {
        let alloc = allocate_records(999, 3).unwrap();
        assert_eq!(alloc.per_client.iter().sum::<u64>(), 999);
        let last = *alloc.per_client.last().unwrap();
        assert!((190..=210).contains(&last), "scale-out share {last}");
    }

    #[test]
    fn preconditions() {
        assert!(matches!(allocate_records(1000, 1), Err(Error::BadAllocation { .. })));
        assert!(matches!(allocate_records(4, 3), Err(Error::BadAllocation { .. })));
        allocate_records(5, 3).unwrap();
    }
}
