//! Workload properties: exact allocation conservation over the sampled
//! parameter space, timestamp monotonicity under every spacing mode, and
//! replay periodicity.

use proptest::prelude::*;
use std::sync::Arc;

use tsbench_core::datagen::replay::{ReplayCursor, SampleSet};
use tsbench_core::datagen::{DistributionSpec, SpacingSpec, SpacingState};
use tsbench_core::workload::{
    allocate_records, ClientWorkload, KindPolicy, MethodSource, ObservedWindow, OpKind,
    SensorProfile, SensorSpace, WorkloadParams,
};
use tsbench_core::{Value, ValueKind};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn allocation_conserves_exactly(k in 2u32..=64, extra in 0u64..1_000_000) {
        let total = (2 * k as u64 - 1) + extra;
        let alloc = allocate_records(total, k).unwrap();
        prop_assert_eq!(alloc.per_client.iter().sum::<u64>(), total);
        prop_assert_eq!(alloc.per_client.len(), k as usize);
        // Standard clients all share one budget; the scale-out client holds
        // the near-half remainder.
        let share = alloc.per_client[0];
        prop_assert!(alloc.per_client[..k as usize - 1].iter().all(|b| *b == share));
        let last = *alloc.per_client.last().unwrap();
        prop_assert!(last >= 1);
        let ideal_last = total as f64 / (2.0 * k as f64 - 1.0);
        prop_assert!((last as f64 - ideal_last).abs() <= k as f64, "last {} vs {}", last, ideal_last);
    }

    #[test]
    fn uneven_spacing_is_strictly_monotonic(seed in any::<u64>(), rate in 0.001f64..10.0) {
        let spec = SpacingSpec::Uneven { inter_arrival: DistributionSpec::exponential(rate) };
        let mut state = SpacingState::new(&spec, 0, seed).unwrap();
        let mut prev = 0;
        for _ in 0..5_000 {
            let t = state.next_timestamp();
            prop_assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn replay_is_periodic(len in 1usize..40, draws in 1usize..200) {
        let points: Vec<(i64, Value)> =
            (0..len).map(|i| (i as i64 * 10, Value::Integer(i as i64))).collect();
        let sample = SampleSet::split(points, 1, 0).unwrap();
        let mut cursor = ReplayCursor::new(&sample, 0, 0);
        for i in 0..draws {
            let (_, v) = cursor.next(&sample);
            prop_assert_eq!(v, Value::Integer((i % len) as i64));
        }
    }
}

#[test]
fn mixed_kind_assignment_is_deterministic_and_covers_kinds() {
    let profile = SensorProfile {
        kinds: KindPolicy::Mixed,
        ..SensorProfile::default_float()
    };
    let a = SensorSpace::build(200, &profile, 9).unwrap();
    let b = SensorSpace::build(200, &profile, 9).unwrap();
    for (x, y) in a.iter().zip(b.iter()) {
        assert_eq!(x.id, y.id);
        assert_eq!(x.kind, y.kind);
    }
    let floats = a.iter().filter(|s| s.kind == ValueKind::Float).count();
    let ints = a.iter().filter(|s| s.kind == ValueKind::Integer).count();
    let texts = a.iter().filter(|s| s.kind == ValueKind::Text).count();
    assert!(floats > ints && ints > texts && texts > 0, "{floats}/{ints}/{texts}");
}

#[test]
fn encoded_size_accounting_matches_serialized_payload() {
    // The sum of encoded_size over a batch equals the byte length of the
    // batch's serialized value payload.
    let profile = SensorProfile { kinds: KindPolicy::Mixed, ..SensorProfile::default_float() };
    let space = Arc::new(SensorSpace::build(12, &profile, 4).unwrap());
    let mut wl = ClientWorkload::build(
        space,
        &MethodSource::Distribution,
        WorkloadParams { query_fraction: 0.0, ..WorkloadParams::default() },
        4,
        0,
        1,
        5_000,
    )
    .unwrap();
    let window = ObservedWindow::new();
    while let Some(op) = wl.next_op(&window) {
        if let OpKind::Write(batch) = op.kind {
            let accounted: u64 = batch.iter().map(|p| p.encoded_size()).sum();
            let serialized: u64 = batch
                .iter()
                .map(|p| match &p.value {
                    Value::Integer(_) => 8,
                    Value::Float(_) => 8,
                    Value::Text(s) => s.len() as u64,
                })
                .sum();
            assert_eq!(accounted, serialized);
        }
    }
}

#[test]
fn replay_source_preserves_gaps_across_batches() {
    let points: Vec<(i64, Value)> =
        vec![(0, Value::Float(1.0)), (10, Value::Float(2.0)), (30, Value::Float(3.0))];
    let sample = Arc::new(SampleSet::split(points, 1, 0).unwrap());
    let space = Arc::new(SensorSpace::build(1, &SensorProfile::default_float(), 1).unwrap());
    let mut wl = ClientWorkload::build(
        space,
        &MethodSource::Replay(sample),
        WorkloadParams {
            query_fraction: 0.0,
            batch_size: 2,
            start_timestamp_ms: 1000,
            ..WorkloadParams::default()
        },
        1,
        0,
        1,
        4,
    )
    .unwrap();
    let window = ObservedWindow::new();
    let mut stamps = Vec::new();
    while let Some(op) = wl.next_op(&window) {
        if let OpKind::Write(batch) = op.kind {
            stamps.extend(batch.iter().map(|p| p.timestamp_ms));
        }
    }
    assert_eq!(stamps, [1000, 1010, 1030, 1040]);
}
