//! Acceptance suite: one test per acceptance criterion, each printing a
//! PASS line with the values it verified. Run with
//! `cargo test -p tsbench --test acceptance -- --nocapture`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use tsbench::report::{parse_report_file, BenchmarkReport, CheckStatus};
use tsbench::sut::modeled::{ModeledConfig, ModeledSut};
use tsbench::sut::reference::{ReferenceStore, StoreConfig};
use tsbench::sut::SutAdapter;
use tsbench_core::codec::{decode_segment, encode_segment, CodecId};
use tsbench_core::datagen::{make_generator, DistributionSpec};
use tsbench_core::metrics::{self, ScaleMode};
use tsbench_core::query::{brute_force_query, rows_bits_eq};
use tsbench_core::rng::Xoshiro256;
use tsbench_core::workload::query::{gen_query, QueryGenConfig, QueryTemplate};
use tsbench_core::workload::{KindPolicy, SensorProfile, SensorSpace};
use tsbench_core::{DataPoint, Timestamp, Value, ValueKind};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tsbench"))
}

fn find_report(dir: &Path) -> PathBuf {
    std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .find(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.starts_with("report-") && n.ends_with(".json"))
                .unwrap_or(false)
        })
        .expect("run emitted a report document")
}

/// Criterion 1: the scalability-model sweep reproduces the closed forms at
/// 1e-9 relative tolerance, and the decaying point sits below the baseline.
#[test]
fn criterion_1_scalability_model_reproduction() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["sweep-scalability", "--out"])
        .arg(dir.path())
        .status()
        .expect("binary runs");
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.path().join("scalability.csv")).unwrap();

    let value = |m: u32, w: &str, mode: &str| -> f64 {
        csv.lines()
            .find(|l| l.starts_with(&format!("{m},{w},{mode},")))
            .unwrap_or_else(|| panic!("row {m},{w},{mode} missing from:\n{csv}"))
            .rsplit(',')
            .next()
            .unwrap()
            .parse()
            .unwrap()
    };
    let rel = |got: f64, want: f64| (got - want).abs() / want;

    let m2 = value(2, "1", "linear");
    assert!(rel(m2, 5125.0) < 1e-9, "m=2 w_s=1: {m2}");
    let m4 = value(4, "1", "linear");
    assert!(rel(m4, 4612.5) < 1e-9, "m=4 w_s=1: {m4}");
    // Closed form R (1 + 1.25 * 0.9^4) / 2 for the decaying curve at m=4.
    let decay_expect = 4100.0 * (1.0 + 1.25 * 0.9f64.powi(4)) / 2.0;
    let m4d = value(4, "0.9", "decaying");
    assert!(rel(m4d, decay_expect) < 1e-9, "m=4 w_s=0.9 decaying: {m4d} vs {decay_expect}");
    assert!(m4d < 4100.0, "decaying scale-out must land below the 4100 baseline");

    println!(
        "ACCEPTANCE 1 (scalability model): PASS — m=2:{m2} kIoTps, m=4:{m4} kIoTps, \
         m=4 decaying:{m4d:.5} kIoTps (< 4100 baseline)"
    );
}

/// Criterion 2: cost-model reproduction with the published constants:
/// crossover at r = 8.79 +- 0.05 and $/kIoTps at r in {1, 10, 100} within
/// 0.5% of {716.2, 137.5, 79.6}.
#[test]
fn criterion_2_cost_and_price_reproduction() {
    // Crossover oracle: bisection of storage_cost(r) = C_S, independent of
    // any closed form.
    let cost = metrics::CostModel::default();
    let target = cost.system_cost();
    let (mut lo, mut hi) = (1.0f64, 100.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if metrics::storage_cost(&cost, 4.1e6, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let crossover = 0.5 * (lo + hi);
    assert!(
        (crossover - 8.79).abs() <= 0.05,
        "storage/system cost crossover at r = {crossover}"
    );

    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["sweep-cost", "--ratios", "1,10,100", "--out"])
        .arg(dir.path())
        .status()
        .expect("binary runs");
    assert!(status.success());
    let csv = std::fs::read_to_string(dir.path().join("price_performance.csv")).unwrap();
    let price = |r: &str| -> f64 {
        csv.lines()
            .find(|l| l.starts_with(&format!("{r},")))
            .unwrap_or_else(|| panic!("row r={r} missing"))
            .rsplit(',')
            .next()
            .unwrap()
            .parse()
            .unwrap()
    };
    for (r, want) in [("1", 716.2), ("10", 137.5), ("100", 79.6)] {
        let got = price(r);
        assert!(
            (got - want).abs() / want < 0.005,
            "$/kIoTps at r={r}: {got} vs ~{want}"
        );
    }

    println!(
        "ACCEPTANCE 2 (cost/price reproduction): PASS — crossover r={crossover:.4}, \
         $/kIoTps = {{1: {:.1}, 10: {:.1}, 100: {:.1}}}",
        price("1"),
        price("10"),
        price("100")
    );
}

/// Criterion 3: end-to-end desk run on the reference store with 10 s phases.
#[test]
fn criterion_3_end_to_end_desk_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("desk.conf");
    std::fs::write(
        &cfg_path,
        "records=300000\n\
         clients=3\n\
         sensors=100\n\
         seed=42\n\
         desk_scale=true\n\
         min_run_seconds=10\n\
         warmup_seconds=0\n\
         client_rate=6000\n\
         sut.adapter=reference\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--quiet", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&out)
        .status()
        .expect("binary runs");
    assert_eq!(status.code(), Some(0), "run must exit 0 with all checks passing");

    let report: BenchmarkReport = parse_report_file(&find_report(&out)).unwrap();
    assert_eq!(report.allocation, vec![120_000, 120_000, 60_000]);
    assert!(report.all_checks_pass(), "{:?}", report.checks);
    assert_eq!(report.iterations.len(), 2);

    for it in &report.iterations {
        // Exact counting identity.
        assert_eq!(it.measured.stable_points + it.measured.scaleout_points, 300_000);
        // All three data checks pass.
        assert_eq!(it.data_check.inserted.status, CheckStatus::Pass);
        assert_eq!(it.data_check.disk.status, CheckStatus::Pass);
        assert_eq!(it.data_check.cross_client.status, CheckStatus::Pass);
        // 10 s phases from the paced 6000 points/s/client profile.
        assert!(
            (it.measured.stable_seconds - 10.0).abs() < 1.5,
            "t0 = {}",
            it.measured.stable_seconds
        );
        assert!(
            (it.measured.scaleout_seconds - 10.0).abs() < 2.0,
            "ts = {}",
            it.measured.scaleout_seconds
        );
        // Standard clients sit near half their budget at the trigger.
        for c in 0..2 {
            let at_trigger = it.measured.per_client_points_at_trigger[c] as f64;
            assert!(
                (at_trigger - 60_000.0).abs() / 60_000.0 < 0.05,
                "client {c} at trigger: {at_trigger}"
            );
        }
    }

    let metrics = report.metrics.as_ref().expect("metrics computed");
    let t_longer = metrics.t1_seconds.max(metrics.t2_seconds);
    assert_eq!(metrics.iotps, 300_000.0 / t_longer, "IoTps = N_p / max(T1, T2)");

    println!(
        "ACCEPTANCE 3 (end-to-end desk run): PASS — allocation {:?}, IoTps {:.1}, \
         T1 {:.2} s, T2 {:.2} s, r {:.2}",
        report.allocation, metrics.iotps, metrics.t1_seconds, metrics.t2_seconds,
        metrics.compression_ratio
    );
}

/// Criterion 4: 1,000 randomized queries across all four templates return
/// bit-exact the brute-force oracle's rows.
#[test]
fn criterion_4_query_oracle_equivalence() {
    let dir = tempfile::tempdir().unwrap();
    let store = ReferenceStore::create(
        &dir.path().join("db"),
        StoreConfig { segment_points: 256, ..Default::default() },
    )
    .unwrap();

    let profile = SensorProfile { kinds: KindPolicy::Mixed, ..SensorProfile::default_float() };
    let space = SensorSpace::build(16, &profile, 99).unwrap();

    // Randomized store contents: ~9,600 points across mixed-kind sensors.
    let mut rng = Xoshiro256::from_seed(2024);
    let mut all: Vec<DataPoint> = Vec::new();
    let start: Timestamp = 1_000_000;
    let mut max_ts = start;
    for spec in space.iter() {
        let mut ts = start;
        let batch: Vec<DataPoint> = (0..600)
            .map(|_| {
                ts += 1 + rng.below(500) as i64;
                max_ts = max_ts.max(ts);
                let value = match spec.kind {
                    ValueKind::Float => Value::Float(rng.next_f64() * 100.0),
                    ValueKind::Integer => Value::Integer(rng.below(1000) as i64),
                    ValueKind::Text => {
                        let len = 1 + rng.below(12) as usize;
                        let mut s = String::new();
                        for _ in 0..len {
                            s.push(
                                tsbench_core::datagen::STRING_ALPHABET
                                    [rng.below(36) as usize] as char,
                            );
                        }
                        Value::Text(s)
                    }
                };
                DataPoint::new(spec.id.clone(), ts, value)
            })
            .collect();
        store.insert(&batch).unwrap();
        all.extend(batch);
    }
    store.flush().unwrap();
    assert!(all.len() <= 10_000);

    let mut qrng = Xoshiro256::from_seed(777);
    let qcfg = QueryGenConfig::default();
    let mut nonempty = 0u32;
    for i in 0..1000 {
        let template = QueryTemplate::ALL[i % 4];
        let spec = gen_query(template, &mut qrng, &space, (start, max_ts), &qcfg).unwrap();
        let got = store.query(&spec).unwrap();
        let want = brute_force_query(&all, &spec).unwrap();
        assert!(
            rows_bits_eq(&got, &want),
            "query #{i} ({:?}) differs from the oracle:\nspec: {spec:?}\nstore {} rows, \
             oracle {} rows",
            template,
            got.len(),
            want.len()
        );
        if !want.is_empty() {
            nonempty += 1;
        }
    }
    assert!(nonempty > 300, "only {nonempty} queries returned rows");

    println!(
        "ACCEPTANCE 4 (query oracle equivalence): PASS — 1000 randomized specs bit-exact, \
         {nonempty} non-empty"
    );
}

/// Criterion 5: codec round-trip identity on 10,000 randomized segments,
/// constant-series compression ratio > 2 on the reference store, and the
/// `none` codec at r <= 1.05.
#[test]
fn criterion_5_codec_properties() {
    let mut rng = Xoshiro256::from_seed(5150);
    let mut trips = 0u32;
    for i in 0..10_000u64 {
        let n = rng.below(120) as usize;
        let mut ts = 1_600_000_000_000i64;
        let kind = i % 3;
        let points: Vec<(Timestamp, Value)> = (0..n)
            .map(|_| {
                ts += 1 + rng.below(1 << 24) as i64;
                let value = match kind {
                    0 => Value::Float(f64::from_bits(rng.next_u64())),
                    1 => Value::Integer(rng.next_u64() as i64),
                    _ => {
                        let len = rng.below(13) as usize;
                        let mut s = String::new();
                        for _ in 0..len {
                            s.push(
                                tsbench_core::datagen::STRING_ALPHABET
                                    [rng.below(36) as usize] as char,
                            );
                        }
                        Value::Text(s)
                    }
                };
                (ts, value)
            })
            .collect();
        let codec = if i % 4 == 3 {
            CodecId::None
        } else {
            match kind {
                0 => CodecId::XorFloat,
                1 => CodecId::DeltaVarint,
                _ => CodecId::DictString,
            }
        };
        let encoded = encode_segment(&points, codec).unwrap();
        let decoded = decode_segment(&encoded, codec).unwrap();
        assert_eq!(decoded.len(), points.len());
        for ((t1, v1), (t2, v2)) in points.iter().zip(&decoded) {
            assert_eq!(t1, t2, "timestamp mismatch under {}", codec.name());
            assert!(v1.bits_eq(v2), "value mismatch under {}: {v1:?} vs {v2:?}", codec.name());
        }
        trips += 1;
    }
    assert_eq!(trips, 10_000);

    // Constant series on the reference store: r > 2.
    let dir = tempfile::tempdir().unwrap();
    let store = ReferenceStore::create(&dir.path().join("db"), StoreConfig::default()).unwrap();
    let sensor: Arc<str> = Arc::from("steady");
    let batch: Vec<DataPoint> =
        (0..20_000).map(|i| DataPoint::new(sensor.clone(), 1000 * i, Value::Float(5.0))).collect();
    let ack = store.insert(&batch).unwrap();
    store.flush().unwrap();
    let constant_ratio = ack.bytes as f64 / store.disk_usage().unwrap() as f64;
    assert!(constant_ratio > 2.0, "constant-series ratio {constant_ratio}");

    // The raw (`none`) baseline never reports meaningful compression.
    let raw = ReferenceStore::create(
        &dir.path().join("raw"),
        StoreConfig { raw_codec: true, ..Default::default() },
    )
    .unwrap();
    let mut vrng = Xoshiro256::from_seed(3);
    let batch: Vec<DataPoint> = (0..5_000)
        .map(|i| DataPoint::new(sensor.clone(), i, Value::Float(f64::from_bits(vrng.next_u64()))))
        .collect();
    let ack = raw.insert(&batch).unwrap();
    raw.flush().unwrap();
    let s_d = raw.disk_usage().unwrap();
    let none_ratio = ack.bytes as f64 / s_d as f64;
    assert!(none_ratio <= 1.05, "none-codec ratio {none_ratio}");
    assert!(s_d >= ack.bytes, "raw storage can never undershoot the ingested volume");

    println!(
        "ACCEPTANCE 5 (codec properties): PASS — 10000 round-trips exact, constant-series \
         r={constant_ratio:.1}, none-codec r={none_ratio:.3}"
    );
}

/// Criterion 6: the modeled SUT's measured admission rate lands within 5% of
/// the law before and after scale-out, across the full grid.
#[test]
fn criterion_6_modeled_throughput_law() {
    fn batch(sensor: &Arc<str>, n: usize, ts: &mut i64) -> Vec<DataPoint> {
        (0..n)
            .map(|_| {
                *ts += 1;
                DataPoint::new(sensor.clone(), *ts, Value::Float(1.0))
            })
            .collect()
    }

    fn measure_rate(sut: &ModeledSut, sensor: &Arc<str>, ts: &mut i64, secs: f64) -> f64 {
        let start = Instant::now();
        let before = sut.accepted_points();
        while start.elapsed().as_secs_f64() < secs {
            sut.insert(&batch(sensor, 50, ts)).unwrap();
        }
        (sut.accepted_points() - before) as f64 / start.elapsed().as_secs_f64()
    }

    let base_rate = 4000.0;
    let sensor: Arc<str> = Arc::from("s");
    let mut results = Vec::new();
    for m in [1u32, 2, 4, 8] {
        for linearity in [1.0, 0.9] {
            for mode in [ScaleMode::Linear, ScaleMode::Decaying] {
                let sut = ModeledSut::new(ModeledConfig {
                    initial_nodes: m,
                    base_rate,
                    linearity,
                    mode,
                    compression_ratio: 10.0,
                });
                let mut ts = 0i64;
                let pre = measure_rate(&sut, &sensor, &mut ts, 5.0);
                assert!(
                    (pre - base_rate).abs() / base_rate < 0.05,
                    "m={m} w={linearity} {}: pre-scale rate {pre}",
                    mode.name()
                );
                let expected = base_rate * ((m as f64 + 1.0) / m as f64)
                    * metrics::effective_linearity(linearity, m, mode);
                sut.scale_out().unwrap();
                let post = measure_rate(&sut, &sensor, &mut ts, 5.0);
                assert!(
                    (post - expected).abs() / expected < 0.05,
                    "m={m} w={linearity} {}: post-scale rate {post} vs law {expected}",
                    mode.name()
                );
                results.push(format!("m={m},w={linearity},{}:{post:.0}", mode.name()));
            }
        }
    }

    println!(
        "ACCEPTANCE 6 (modeled throughput law): PASS — 16 combinations within 5% [{}]",
        results.join(" ")
    );
}

/// Criterion 7: two `run` invocations with identical config and seed on the
/// modeled SUT produce identical counts, allocation and metric fields.
#[test]
fn criterion_7_rerun_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("det.conf");
    std::fs::write(
        &cfg_path,
        "records=280000\n\
         clients=3\n\
         sensors=50\n\
         seed=31415\n\
         desk_scale=true\n\
         min_run_seconds=5\n\
         warmup_seconds=0\n\
         query_fraction=0.05\n\
         sut.adapter=modeled\n\
         modeled.rate=40000\n",
    )
    .unwrap();

    let mut reports = Vec::new();
    for invocation in 0..2 {
        let out = dir.path().join(format!("out{invocation}"));
        let status = bin()
            .args(["run", "--quiet", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out)
            .status()
            .expect("binary runs");
        assert_eq!(status.code(), Some(0));
        reports.push(parse_report_file(&find_report(&out)).unwrap());
    }
    let (a, b) = (&reports[0], &reports[1]);

    assert_eq!(a.allocation, b.allocation);
    assert_eq!(a.config, b.config);
    for (x, y) in a.iterations.iter().zip(&b.iterations) {
        assert_eq!(x.measured.total_points(), y.measured.total_points());
        assert_eq!(x.measured.stable_points, y.measured.stable_points);
        assert_eq!(x.measured.scaleout_points, y.measured.scaleout_points);
        assert_eq!(x.measured.stable_seconds, y.measured.stable_seconds);
        assert_eq!(x.measured.scaleout_seconds, y.measured.scaleout_seconds);
        assert_eq!(x.run_seconds, y.run_seconds);
        assert_eq!(x.data_check.ingested_bytes, y.data_check.ingested_bytes);
        assert_eq!(x.data_check.disk_bytes, y.data_check.disk_bytes);
    }
    assert_eq!(a.metrics, b.metrics, "metric fields must be identical");
    let m = a.metrics.as_ref().unwrap();

    println!(
        "ACCEPTANCE 7 (rerun determinism): PASS — N_p {}, n0 {}, ns {}, IoTps {:.3}, \
         $/kIoTps {:.4} identical across invocations",
        a.iterations[0].measured.total_points(),
        a.iterations[0].measured.stable_points,
        a.iterations[0].measured.scaleout_points,
        m.iotps,
        m.usd_per_kiotps
    );
}

/// Criterion 8: Poisson/Pareto/exponential empirical means over 1e6 draws
/// within 5 standard errors of the analytic means.
#[test]
fn criterion_8_distribution_sanity() {
    const DRAWS: usize = 1_000_000;
    // (spec, analytic mean, analytic variance)
    let cases = [
        (DistributionSpec::poisson(10.0), 10.0, 10.0),
        (DistributionSpec::pareto(3.0, 1.0), 1.5, 0.75),
        (DistributionSpec::exponential(2.0), 0.5, 0.25),
    ];
    let mut seen = Vec::new();
    for (spec, mean, variance) in cases {
        let mut gen = make_generator(&spec, 8086).unwrap();
        let sum: f64 = (0..DRAWS).map(|_| gen.next_f64()).sum();
        let got = sum / DRAWS as f64;
        let se = (variance / DRAWS as f64).sqrt();
        assert!(
            (got - mean).abs() <= 5.0 * se,
            "{:?}: empirical mean {got} vs {mean} (5 SE = {})",
            spec.kind,
            5.0 * se
        );
        seen.push(format!("{}:{got:.4}", spec.kind.name()));
    }
    println!(
        "ACCEPTANCE 8 (distribution sanity): PASS — means within 5 SE [{}]",
        seen.join(" ")
    );
}
