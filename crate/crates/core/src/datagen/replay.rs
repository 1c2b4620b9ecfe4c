//! Periodic sample replay.
//!
//! A loaded sample is split into `set_count` contiguous sets; worker thread
//! `i` replays set `i mod set_count` cyclically. Values repeat with the set's
//! period and the sample's inter-arrival gaps are preserved: emitted
//! timestamps start at the workload clock and advance by the sample's gap
//! sequence, which cycles with period `len - 1`.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::point::{Timestamp, Value};

/// An immutable replay corpus: `set_count` value sequences of equal length.
#[derive(Debug, Clone)]
pub struct SampleSet {
    sets: Vec<Arc<[(Timestamp, Value)]>>,
    points_per_set: usize,
}

impl SampleSet {
    /// Split `points` (in load order) into `set_count` contiguous sets of
    /// `points_per_set` points each. `points_per_set == 0` derives the
    /// largest size that fits; a trailing remainder is dropped so that
    /// `set_count * points_per_set` equals the total kept.
    pub fn split(
        points: Vec<(Timestamp, Value)>,
        set_count: usize,
        points_per_set: usize,
    ) -> Result<Self> {
        if set_count == 0 {
            return Err(Error::InvalidParam {
                field: "set_count".into(),
                reason: "must be positive".into(),
            });
        }
        let per_set = if points_per_set == 0 { points.len() / set_count } else { points_per_set };
        if per_set == 0 || points.len() < set_count * per_set {
            return Err(Error::EmptySample);
        }
        let sets = points
            .chunks(per_set)
            .take(set_count)
            .map(|chunk| Arc::from(chunk.to_vec().into_boxed_slice()))
            .collect();
        Ok(SampleSet { sets, points_per_set: per_set })
    }

    pub fn set_count(&self) -> usize {
        self.sets.len()
    }

    pub fn points_per_set(&self) -> usize {
        self.points_per_set
    }

    /// Total points held across all sets.
    pub fn total_points(&self) -> usize {
        self.sets.len() * self.points_per_set
    }

    /// The set a worker thread is bound to.
    pub fn set_for_thread(&self, thread_index: usize) -> usize {
        thread_index % self.sets.len()
    }

    fn set(&self, idx: usize) -> &[(Timestamp, Value)] {
        &self.sets[idx]
    }
}

/// Cyclic replay cursor with gap-preserving re-stamping.
#[derive(Debug, Clone)]
pub struct ReplayCursor {
    set: usize,
    emitted: u64,
    clock: Timestamp,
}

impl ReplayCursor {
    /// Bind thread `thread_index` to its set and start the emitted clock at
    /// `start`; the first point is stamped exactly at `start`.
    pub fn new(sample: &SampleSet, thread_index: usize, start: Timestamp) -> Self {
        ReplayCursor { set: sample.set_for_thread(thread_index), emitted: 0, clock: start }
    }

    pub fn next(&mut self, sample: &SampleSet) -> (Timestamp, Value) {
        let set = sample.set(self.set);
        let len = set.len();
        let pos = (self.emitted % len as u64) as usize;
        if self.emitted > 0 {
            let gap = if len == 1 {
                1
            } else {
                let gap_idx = ((self.emitted - 1) % (len as u64 - 1)) as usize;
                (set[gap_idx + 1].0 - set[gap_idx].0).max(1)
            };
            self.clock = self.clock.saturating_add(gap);
        }
        self.emitted += 1;
        (self.clock, set[pos].1.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_of(values: &[(i64, f64)], sets: usize) -> SampleSet {
        let points = values.iter().map(|(t, v)| (*t, Value::Float(*v))).collect();
        SampleSet::split(points, sets, 0).unwrap()
    }

    #[test]
    fn values_wrap_periodically() {
        let sample = sample_of(&[(0, 1.0), (10, 2.0), (20, 3.0)], 1);
        let mut cursor = ReplayCursor::new(&sample, 0, 0);
        let drawn: Vec<f64> = (0..5)
            .map(|_| match cursor.next(&sample).1 {
                Value::Float(v) => v,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(drawn, [1.0, 2.0, 3.0, 1.0, 2.0]);
    }

    #[test]
    fn thread_binding_is_mod_set_count() {
        let points: Vec<(Timestamp, Value)> =
            (0..100).map(|i| (i as i64, Value::Integer(i))).collect();
        let sample = SampleSet::split(points, 10, 0).unwrap();
        assert_eq!(sample.set_for_thread(12), 2);
        assert_eq!(sample.points_per_set(), 10);
        assert_eq!(sample.total_points(), 100);
    }

    #[test]
    fn restamping_preserves_sample_gaps() {
        // Sample gaps are (10 ms, 20 ms); replay from workload start 1000.
        let sample = sample_of(&[(500, 1.0), (510, 2.0), (530, 3.0)], 1);
        let mut cursor = ReplayCursor::new(&sample, 0, 1000);
        let stamps: Vec<i64> = (0..4).map(|_| cursor.next(&sample).0).collect();
        assert_eq!(stamps, [1000, 1010, 1030, 1040]);
    }

    #[test]
    fn single_point_sample_still_advances() {
        let sample = sample_of(&[(0, 9.0)], 1);
        let mut cursor = ReplayCursor::new(&sample, 0, 50);
        assert_eq!(cursor.next(&sample).0, 50);
        assert_eq!(cursor.next(&sample).0, 51);
        assert_eq!(cursor.next(&sample).0, 52);
    }

    #[test]
    fn split_errors() {
        assert_eq!(SampleSet::split(Vec::new(), 10, 0).unwrap_err(), Error::EmptySample);
        let points: Vec<(Timestamp, Value)> = (0..5).map(|i| (i, Value::Integer(i))).collect();
        // 5 points cannot fill 10 sets.
        assert_eq!(SampleSet::split(points.clone(), 10, 0).unwrap_err(), Error::EmptySample);
        // Explicit per-set size larger than the data.
        assert_eq!(SampleSet::split(points, 2, 10).unwrap_err(), Error::EmptySample);
    }

    #[test]
    fn remainder_points_are_dropped() {
        let points: Vec<(Timestamp, Value)> = (0..23).map(|i| (i, Value::Integer(i))).collect();
        let sample = SampleSet::split(points, 10, 0).unwrap();
        assert_eq!(sample.points_per_set(), 2);
        assert_eq!(sample.total_points(), 20);
    }
}
