//! Benchmark driver: prerequisite checks, two iterations of
//! warmup + measured runs with a mid-run scale-out, data checks, cleanup and
//! report assembly.
//!
//! Execution shape: one coordinator thread and `k` client worker threads
//! (grouped into `n_i` in-process driver instances). Workers own their
//! generator state; the coordinator owns phase scheduling. The measured run
//! starts with `k - 1` clients, and at the stable-phase boundary (half the
//! warmup runtime) the coordinator invokes `scale_out` on the SUT and
//! releases the standby client. Counters are per-client atomics merged at
//! phase boundaries; no worker ever blocks on another worker.
//!
//! Timing sources: wall-timed adapters report measured wall-clock phases.
//! For the modeled SUT driven open-loop, the canonical phase stats are
//! law-derived (the law is exact ground truth for a synthetic SUT), which
//! makes rerun reports bit-identical; the raw wall measurements are kept
//! alongside.

pub mod checks;

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicU8, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant, SystemTime};

use tsbench_core::datagen::model::fit_model;
use tsbench_core::datagen::replay::SampleSet;
use tsbench_core::metrics::{self, effective_linearity};
use tsbench_core::rng::{stream_seed, StreamKind, Xoshiro256};
use tsbench_core::workload::query::QueryTemplate;
use tsbench_core::workload::{
    allocate_records, Allocation, ClientWorkload, MethodSource, ObservedWindow, OpKind,
    SensorSpace,
};
use tsbench_core::DataPoint;

use crate::config::{GenMethod, RunConfig};
use crate::report::{
    BenchmarkReport, CheckOutcome, DataCheckReport, IterationResult, MetricsReport, ModelPhase,
    PhaseStats, ScaleOutReport, TemplateLatency, WarmupStats,
};
use crate::sample;
use crate::sut::{self, ScaleOutOutcome, SutAdapter};

const VERIFY_SAMPLE_TARGET: usize = 1_000;
const LATENCY_RESERVOIR: usize = 10_000;

/// Driver instance a client belongs to. Instances are in-process groupings
/// of the worker threads; client `c` of `n_i` instances runs inside
/// instance `c mod n_i`.
pub fn instance_of(client: u32, instances: u32) -> u32 {
    client % instances.max(1)
}

pub struct RunOptions {
    pub out_dir: std::path::PathBuf,
    /// Emit `phase=<...> points=<n> bytes=<b> qps=<q>` progress lines.
    pub progress: bool,
}

/// Execute the full benchmark procedure and assemble the report. The report
/// is produced even when checks fail; `report.exit_code()` maps it to the
/// process exit status.
pub fn run_benchmark(cfg: &RunConfig, opts: &RunOptions) -> BenchmarkReport {
    let started_unix_ms = unix_ms();
    let mut checks = checks::prerequisite_checks(cfg, &opts.out_dir);
    let mut report = BenchmarkReport {
        schema_version: 1,
        harness_version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix_ms,
        finished_unix_ms: started_unix_ms,
        desk_scale: cfg.desk_scale,
        config: cfg.echo(),
        allocation: Vec::new(),
        iterations: Vec::new(),
        metrics: None,
        checks: Vec::new(),
        failure_stage: None,
    };

    if checks.iter().any(CheckOutcome::failed) {
        report.checks = checks;
        report.failure_stage = Some("prerequisite".into());
        report.finished_unix_ms = unix_ms();
        return report;
    }

    // Allocation and sensor space are computed once and shared.
    let allocation = match allocate_records(cfg.records, cfg.clients) {
        Ok(a) => a,
        Err(e) => {
            checks.push(CheckOutcome::fail("config-invariants", e.to_string()));
            report.checks = checks;
            report.failure_stage = Some("prerequisite".into());
            report.finished_unix_ms = unix_ms();
            return report;
        }
    };
    report.allocation = allocation.per_client.clone();

    let space = match SensorSpace::build(cfg.sensors, &cfg.sensor_profile(), cfg.seed) {
        Ok(s) => Arc::new(s),
        Err(e) => {
            checks.push(CheckOutcome::fail("config-invariants", e.to_string()));
            report.checks = checks;
            report.failure_stage = Some("prerequisite".into());
            report.finished_unix_ms = unix_ms();
            return report;
        }
    };

    // Data-generation method setup. The model phase runs once, before the
    // iterations; the fitted model is reused by both (never refitted).
    let mut model_phase = None;
    let method = match build_method(cfg, &mut model_phase) {
        Ok(m) => m,
        Err(e) => {
            checks.push(CheckOutcome::fail("sample-file", e));
            report.checks = checks;
            report.failure_stage = Some("prerequisite".into());
            report.finished_unix_ms = unix_ms();
            return report;
        }
    };

    let data_dir = sut::resolve_data_dir(cfg, &opts.out_dir);
    let adapter = match sut::build_adapter(cfg, &data_dir) {
        Ok(a) => a,
        Err(e) => {
            checks.push(CheckOutcome::fail("sut-adapter", e.to_string()));
            report.checks = checks;
            report.failure_stage = Some("prerequisite".into());
            report.finished_unix_ms = unix_ms();
            return report;
        }
    };

    for iteration in 1..=2u32 {
        let phase_model = if iteration == 1 { model_phase.take() } else { None };
        let result = run_iteration(
            cfg,
            opts,
            iteration,
            space.clone(),
            &method,
            &allocation,
            &adapter,
            &data_dir,
            phase_model,
        );

        // Flatten this iteration's gates into the report check list.
        let t = result.run_seconds;
        checks.push(prefixed(&result.data_check.inserted, iteration));
        checks.push(prefixed(&result.data_check.disk, iteration));
        checks.push(prefixed(&result.data_check.cross_client, iteration));
        checks.push(budget_outcome(&result, allocation.total, iteration));
        checks.push(run_duration_outcome(t, cfg.min_run_seconds, iteration));
        checks.push(checks::min_rate_outcome(
            &format!("min-rate-{iteration}"),
            result.measured.total_points(),
            cfg.sensors,
            t.max(f64::MIN_POSITIVE),
            cfg.min_per_sensor_rate,
        ));

        let failed = result.failure.clone();
        let any_check_failed = [
            &result.data_check.inserted,
            &result.data_check.disk,
            &result.data_check.cross_client,
        ]
        .iter()
        .any(|c| c.failed());
        report.iterations.push(result);

        if let Some(failure) = failed {
            checks.push(CheckOutcome::fail(
                &format!("sut-run-{iteration}"),
                failure,
            ));
            report.failure_stage = Some(format!("iteration-{iteration}"));
            break;
        }
        if any_check_failed {
            report.failure_stage = Some(format!("data-check-{iteration}"));
            break;
        }

        // System cleanup between the two iterations.
        if iteration == 1 {
            if let Err(e) = adapter.cleanup() {
                checks.push(CheckOutcome::fail("system-cleanup", e.to_string()));
                report.failure_stage = Some("cleanup".into());
                break;
            }
        }
    }

    checks.push(CheckOutcome::skipped(
        "replica-check",
        "replica-count validation does not apply: the built-in stores have no replication",
    ));

    if report.failure_stage.is_none() && report.iterations.len() == 2 {
        let (metrics_report, metric_checks) = assemble_metrics(cfg, &report.iterations);
        checks.extend(metric_checks);
        report.metrics = metrics_report;
    }

    report.checks = checks;
    report.finished_unix_ms = unix_ms();
    report
}

fn prefixed(check: &CheckOutcome, iteration: u32) -> CheckOutcome {
    CheckOutcome { name: format!("{}-{iteration}", check.name), ..check.clone() }
}

fn budget_outcome(result: &IterationResult, expected: u64, iteration: u32) -> CheckOutcome {
    let got = result.measured.total_points();
    if got == expected {
        CheckOutcome::pass(&format!("budget-complete-{iteration}"), format!("{got} points"))
    } else {
        CheckOutcome::fail(
            &format!("budget-complete-{iteration}"),
            format!("measured run ingested {got} of {expected} points"),
        )
    }
}

fn run_duration_outcome(t: f64, min_run: f64, iteration: u32) -> CheckOutcome {
    if t >= min_run {
        CheckOutcome::pass(&format!("run-duration-{iteration}"), format!("{t:.3} s >= {min_run} s"))
    } else {
        CheckOutcome::fail(
            &format!("run-duration-{iteration}"),
            format!("measured run lasted {t:.3} s, below the {min_run} s floor"),
        )
    }
}

fn build_method(
    cfg: &RunConfig,
    model_phase: &mut Option<ModelPhase>,
) -> Result<MethodSource, String> {
    match cfg.datagen.method {
        GenMethod::Distribution => Ok(MethodSource::Distribution),
        GenMethod::Replay => {
            let path = cfg.datagen.sample_file.as_ref().expect("validated");
            let points = sample::load_sample(path).map_err(|e| e.to_string())?;
            let points = points.into_iter().map(|p| (p.timestamp_ms, p.value)).collect();
            let sets = SampleSet::split(
                points,
                cfg.datagen.replay_set_count as usize,
                cfg.replay_points_per_set() as usize,
            )
            .map_err(|e| e.to_string())?;
            Ok(MethodSource::Replay(Arc::new(sets)))
        }
        GenMethod::Model => {
            let path = cfg.datagen.sample_file.as_ref().expect("validated");
            let points = sample::load_sample(path).map_err(|e| e.to_string())?;
            let series = sample::numeric_series(&points).map_err(|e| e.to_string())?;
            let fit_start = Instant::now();
            let model = fit_model(&series).map_err(|e| e.to_string())?;
            *model_phase = Some(ModelPhase {
                fit_seconds: fit_start.elapsed().as_secs_f64(),
                sample_points: series.len() as u64,
            });
            Ok(MethodSource::Model(Arc::new(model)))
        }
    }
}

/// Scalability-law parameters when canonical stats are law-derived: the
/// modeled SUT driven open-loop.
struct LawParams {
    base_rate: f64,
    linearity: f64,
    mode: metrics::ScaleMode,
    nodes: u32,
}

fn law_params(cfg: &RunConfig) -> Option<LawParams> {
    if cfg.sut.adapter == "modeled" && cfg.client_rate == 0.0 {
        Some(LawParams {
            base_rate: cfg.sut.modeled_rate,
            linearity: cfg.sut.modeled_linearity,
            mode: cfg.sut.modeled_mode,
            nodes: cfg.sut.nodes,
        })
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn run_iteration(
    cfg: &RunConfig,
    opts: &RunOptions,
    iteration: u32,
    space: Arc<SensorSpace>,
    method: &MethodSource,
    allocation: &Allocation,
    adapter: &Arc<dyn SutAdapter>,
    data_dir: &std::path::Path,
    model_phase: Option<ModelPhase>,
) -> IterationResult {
    let k = cfg.clients;
    let params = cfg.workload_params();
    let law = law_params(cfg);

    let empty_result = |failure: String| IterationResult {
        index: iteration,
        model_phase: model_phase.clone(),
        warmup: WarmupStats { seconds: 0.0, points: 0, bytes: 0, queries: 0, capped: false },
        measured: empty_phase_stats(allocation),
        run_seconds: 0.0,
        scale_out: ScaleOutReport {
            performed: false,
            nodes_before: 0,
            nodes_after: 0,
            detail: "run aborted before the scale-out boundary".into(),
        },
        data_check: DataCheckReport {
            inserted: CheckOutcome::fail("inserted-check", "run aborted"),
            disk: CheckOutcome::fail("disk-check", "run aborted"),
            disk_bytes: 0,
            ingested_bytes: 0,
            cross_client: CheckOutcome::skipped("cross-client", "run aborted"),
        },
        valid: false,
        failure: Some(failure),
    };

    // Fresh per-iteration generator states; both iterations replay the same
    // deterministic workload against a cleaned system.
    let mut clients = Vec::with_capacity(k as usize);
    for c in 0..k {
        match ClientWorkload::build(
            space.clone(),
            method,
            params.clone(),
            cfg.seed,
            c,
            k,
            allocation.per_client[c as usize],
        ) {
            Ok(wl) => clients.push(wl),
            Err(e) => return empty_result(format!("workload construction: {e}")),
        }
    }

    let window = Arc::new(ObservedWindow::new());

    // Warmup run: the full allocation, all clients active, optionally capped.
    let warmup_exec = execute_run(
        cfg,
        opts,
        &mut clients,
        adapter,
        &window,
        RunFlavor::Warmup { cap_seconds: cfg.warmup_cap_seconds },
    );
    if let Some(failure) = warmup_exec.failure.clone() {
        let mut result = empty_result(failure);
        result.warmup = warmup_stats(&warmup_exec, law.as_ref(), allocation, cfg);
        return result;
    }

    // The warmup runtime sets the stable-phase length.
    let warmup = warmup_stats(&warmup_exec, law.as_ref(), allocation, cfg);
    let boundary_seconds = warmup.seconds / 2.0;

    for (c, wl) in clients.iter_mut().enumerate() {
        wl.reset_budget(allocation.per_client[c]);
    }

    let measured_exec = execute_run(
        cfg,
        opts,
        &mut clients,
        adapter,
        &window,
        RunFlavor::Measured { boundary_seconds, scale_out_client: allocation.scale_out_client },
    );

    let scale_out = scale_out_report(&measured_exec);
    let measured = phase_stats(&measured_exec, law.as_ref(), allocation, boundary_seconds);
    let run_seconds = measured.run_seconds();

    if let Some(failure) = measured_exec.failure.clone() {
        let mut result = empty_result(failure);
        result.warmup = warmup;
        result.measured = measured;
        result.run_seconds = run_seconds;
        result.scale_out = scale_out;
        return result;
    }

    // Data checks: flush, then validate volumes and re-read a sample through
    // an independent connection.
    if let Err(e) = adapter.flush() {
        let mut result = empty_result(format!("flush: {e}"));
        result.warmup = warmup;
        result.measured = measured;
        result.run_seconds = run_seconds;
        result.scale_out = scale_out;
        return result;
    }

    let data_check = data_check(cfg, data_dir, adapter, &warmup_exec, &measured_exec);

    IterationResult {
        index: iteration,
        model_phase,
        warmup,
        measured,
        run_seconds,
        scale_out,
        data_check,
        valid: true,
        failure: None,
    }
}

fn empty_phase_stats(allocation: &Allocation) -> PhaseStats {
    PhaseStats {
        stable_points: 0,
        scaleout_points: 0,
        stable_seconds: 0.0,
        scaleout_seconds: 0.0,
        ingested_bytes: 0,
        queries: 0,
        per_client_budget: allocation.per_client.clone(),
        per_client_points_at_trigger: Vec::new(),
        query_latency: Vec::new(),
        wall_stable_seconds: 0.0,
        wall_scaleout_seconds: 0.0,
    }
}

fn warmup_stats(
    exec: &ExecOutcome,
    law: Option<&LawParams>,
    allocation: &Allocation,
    cfg: &RunConfig,
) -> WarmupStats {
    // For the law-driven path the canonical warmup runtime is exact:
    // min(cap, N_p / R). Wall time tracks it within scheduling noise.
    let seconds = match law {
        Some(law) => {
            let full = allocation.total as f64 / law.base_rate;
            if cfg.warmup_cap_seconds > 0.0 {
                full.min(cfg.warmup_cap_seconds)
            } else {
                full
            }
        }
        None => exec.wall_seconds,
    };
    WarmupStats {
        seconds,
        points: exec.acked_points,
        bytes: exec.acked_bytes,
        queries: exec.queries,
        capped: exec.capped,
    }
}

fn scale_out_report(exec: &ExecOutcome) -> ScaleOutReport {
    match &exec.trigger {
        Some(trigger) => match &trigger.scale_outcome {
            Ok(ScaleOutOutcome::ScaledTo(desc)) => ScaleOutReport {
                performed: true,
                nodes_before: desc.nodes - 1,
                nodes_after: desc.nodes,
                detail: String::new(),
            },
            Ok(ScaleOutOutcome::NonScalable) => ScaleOutReport {
                performed: false,
                nodes_before: trigger.nodes_before,
                nodes_after: trigger.nodes_before,
                detail: "system declared non-scalable; scale-out phase ran on the same topology"
                    .into(),
            },
            Err(e) => ScaleOutReport {
                performed: false,
                nodes_before: trigger.nodes_before,
                nodes_after: trigger.nodes_before,
                detail: format!("scale-out failed: {e}"),
            },
        },
        None => ScaleOutReport {
            performed: false,
            nodes_before: 0,
            nodes_after: 0,
            detail: "no scale-out boundary in this run".into(),
        },
    }
}

fn phase_stats(
    exec: &ExecOutcome,
    law: Option<&LawParams>,
    allocation: &Allocation,
    boundary_seconds: f64,
) -> PhaseStats {
    let trigger = exec.trigger.as_ref();
    let wall_t0 = trigger.map(|t| t.wall_seconds_at).unwrap_or(exec.wall_seconds);
    let wall_ts = (exec.wall_seconds - wall_t0).max(0.0);

    let (n0, ns, t0, ts) = match law {
        Some(law) if exec.failure.is_none() => {
            // Law-derived canonical stats: the stable phase admits R points
            // per second for half the warmup runtime, then the post-scale
            // rate takes over until the budget is exhausted.
            let m = law.nodes as f64;
            let post_rate = law.base_rate
                * ((m + 1.0) / m)
                * effective_linearity(law.linearity, law.nodes, law.mode);
            let n0 = ((law.base_rate * boundary_seconds).floor() as u64)
                .min(allocation.standard_total());
            let ns = allocation.total - n0;
            (n0, ns, boundary_seconds, ns as f64 / post_rate)
        }
        _ => {
            let n0 = trigger.map(|t| t.total_points).unwrap_or(exec.acked_points);
            let ns = exec.acked_points.saturating_sub(n0);
            (n0, ns, wall_t0, wall_ts)
        }
    };

    PhaseStats {
        stable_points: n0,
        scaleout_points: ns,
        stable_seconds: t0,
        scaleout_seconds: ts,
        ingested_bytes: exec.acked_bytes,
        queries: exec.queries,
        per_client_budget: allocation.per_client.clone(),
        per_client_points_at_trigger: trigger.map(|t| t.per_client_points.clone()).unwrap_or_default(),
        query_latency: exec.latency_summary(),
        wall_stable_seconds: wall_t0,
        wall_scaleout_seconds: wall_ts,
    }
}

fn data_check(
    cfg: &RunConfig,
    data_dir: &std::path::Path,
    adapter: &Arc<dyn SutAdapter>,
    warmup: &ExecOutcome,
    measured: &ExecOutcome,
) -> DataCheckReport {
    // Inserted check: the harness ledger of issued writes must equal the
    // acknowledged totals exactly.
    let issued_points = warmup.issued_points + measured.issued_points;
    let issued_bytes = warmup.issued_bytes + measured.issued_bytes;
    let acked_points = warmup.acked_points + measured.acked_points;
    let acked_bytes = warmup.acked_bytes + measured.acked_bytes;
    let inserted =
        checks::inserted_outcome(issued_points, issued_bytes, acked_points, acked_bytes);

    let (disk, disk_bytes) = match adapter.disk_usage() {
        Ok(bytes) => (CheckOutcome::pass("disk-check", format!("S_d = {bytes} bytes")), bytes),
        Err(e) => (CheckOutcome::fail("disk-check", e.to_string()), 0),
    };

    let cross_client = cross_client_check(cfg, data_dir, adapter, &measured.samples);

    DataCheckReport {
        inserted,
        disk,
        disk_bytes,
        ingested_bytes: acked_bytes,
        cross_client,
    }
}

/// Re-read a random sample of the measured run's writes through a second,
/// independent client connection and compare bit-exact.
fn cross_client_check(
    cfg: &RunConfig,
    data_dir: &std::path::Path,
    adapter: &Arc<dyn SutAdapter>,
    samples: &[DataPoint],
) -> CheckOutcome {
    if !adapter.descriptor().verifiable {
        return CheckOutcome::skipped(
            "cross-client",
            "adapter does not retain data for re-reading",
        );
    }
    let verifier = match sut::verification_handle(cfg, data_dir) {
        Ok(Some(v)) => v,
        Ok(None) => {
            return CheckOutcome::skipped("cross-client", "no verification connection available")
        }
        Err(e) => return CheckOutcome::fail("cross-client", format!("open second client: {e}")),
    };
    for point in samples {
        let spec = tsbench_core::workload::query::QuerySpec::time_range(
            vec![point.sensor.clone()],
            point.timestamp_ms,
            point.timestamp_ms,
        );
        let rows = match verifier.query(&spec) {
            Ok(rows) => rows,
            Err(e) => return CheckOutcome::fail("cross-client", format!("re-read: {e}")),
        };
        let hit = rows.iter().any(|row| match row {
            tsbench_core::query::Row::Point { sensor, timestamp_ms, value } => {
                sensor == &point.sensor
                    && *timestamp_ms == point.timestamp_ms
                    && value.bits_eq(&point.value)
            }
            _ => false,
        });
        if !hit {
            return CheckOutcome::fail(
                "cross-client",
                format!(
                    "first differing record: sensor {} ts {} value {} not found bit-exact \
                     via the second connection",
                    point.sensor, point.timestamp_ms, point.value
                ),
            );
        }
    }
    CheckOutcome::pass("cross-client", format!("{} sampled points re-read bit-exact", samples.len()))
}

fn assemble_metrics(
    cfg: &RunConfig,
    iterations: &[IterationResult],
) -> (Option<MetricsReport>, Vec<CheckOutcome>) {
    let mut checks = Vec::new();
    let (it1, it2) = (&iterations[0], &iterations[1]);
    let t1 = it1.run_seconds;
    let t2 = it2.run_seconds;
    let performance = if t1 >= t2 { it1 } else { it2 };

    let iotps = match metrics::iotps(performance.measured.total_points(), t1, t2) {
        Ok(v) => v,
        Err(e) => {
            checks.push(CheckOutcome::fail("metrics", e.to_string()));
            return (None, checks);
        }
    };

    let s_i = performance.data_check.ingested_bytes;
    let s_d = performance.data_check.disk_bytes;
    let ratio = match metrics::compression_ratio(s_i, s_d) {
        Ok(r) => r,
        Err(e) => {
            checks.push(CheckOutcome::fail("metrics", e.to_string()));
            return (None, checks);
        }
    };

    checks.push(match cfg.cost.check_capacity(s_i) {
        Ok(()) => CheckOutcome::pass(
            "storage-capacity",
            format!("S_0 = {} B >= S_i = {s_i} B", cfg.cost.storage_capacity_bytes),
        ),
        Err(e) => CheckOutcome::fail("storage-capacity", e.to_string()),
    });
    if checks.last().map(|c| c.failed()).unwrap_or(false) {
        return (None, checks);
    }

    let storage_cost = metrics::storage_cost(&cfg.cost, iotps, ratio);
    let system_cost = cfg.cost.system_cost();
    let usd_per_kiotps = match metrics::price_performance(&cfg.cost, iotps, ratio) {
        Ok(v) => v,
        Err(e) => {
            checks.push(CheckOutcome::fail("metrics", e.to_string()));
            return (None, checks);
        }
    };

    (
        Some(MetricsReport {
            iotps,
            kiotps: iotps / 1000.0,
            performance_run: performance.index,
            t1_seconds: t1,
            t2_seconds: t2,
            ingested_bytes: s_i,
            disk_bytes: s_d,
            compression_ratio: ratio,
            storage_cost_usd: storage_cost,
            system_cost_usd: system_cost,
            total_cost_usd: system_cost + storage_cost,
            usd_per_kiotps,
        }),
        checks,
    )
}

// ---------------------------------------------------------------------------
// Run execution: client threads + coordinator.

#[derive(Clone, Copy)]
enum RunFlavor {
    Warmup { cap_seconds: f64 },
    Measured { boundary_seconds: f64, scale_out_client: usize },
}

struct Trigger {
    wall_seconds_at: f64,
    per_client_points: Vec<u64>,
    total_points: u64,
    nodes_before: u32,
    scale_outcome: Result<ScaleOutOutcome, String>,
}

#[derive(Default)]
struct LatencyAcc {
    count: u64,
    sum_ms: f64,
    reservoir: Vec<f64>,
    seen: u64,
}

impl LatencyAcc {
    fn record(&mut self, ms: f64, rng: &mut Xoshiro256) {
        self.count += 1;
        self.sum_ms += ms;
        self.seen += 1;
        if self.reservoir.len() < LATENCY_RESERVOIR {
            self.reservoir.push(ms);
        } else {
            let j = rng.below(self.seen) as usize;
            if j < LATENCY_RESERVOIR {
                self.reservoir[j] = ms;
            }
        }
    }

    fn merge(&mut self, other: LatencyAcc) {
        self.count += other.count;
        self.sum_ms += other.sum_ms;
        self.seen += other.seen;
        self.reservoir.extend(other.reservoir);
    }
}

struct ExecOutcome {
    wall_seconds: f64,
    capped: bool,
    issued_points: u64,
    issued_bytes: u64,
    acked_points: u64,
    acked_bytes: u64,
    queries: u64,
    per_client_acked: Vec<u64>,
    trigger: Option<Trigger>,
    latencies: [LatencyAcc; 4],
    samples: Vec<DataPoint>,
    failure: Option<String>,
}

impl ExecOutcome {
    fn latency_summary(&self) -> Vec<TemplateLatency> {
        QueryTemplate::ALL
            .iter()
            .map(|t| {
                let acc = &self.latencies[t.index()];
                let mut sorted = acc.reservoir.clone();
                sorted.sort_by(f64::total_cmp);
                let p95 = if sorted.is_empty() {
                    0.0
                } else {
                    sorted[((sorted.len() as f64 * 0.95).ceil() as usize).clamp(1, sorted.len()) - 1]
                };
                TemplateLatency {
                    template: t.name().to_string(),
                    count: acc.count,
                    mean_ms: if acc.count == 0 { 0.0 } else { acc.sum_ms / acc.count as f64 },
                    p95_ms: p95,
                }
            })
            .collect()
    }
}

/// Per-client local accumulation, merged after the join.
struct ClientLocal {
    issued_points: u64,
    issued_bytes: u64,
    queries: u64,
    capped: bool,
    latencies: [LatencyAcc; 4],
    sample_reservoir: Vec<DataPoint>,
    sample_seen: u64,
    rng: Xoshiro256,
}

impl ClientLocal {
    fn new(seed: u64, client: u32) -> Self {
        ClientLocal {
            issued_points: 0,
            issued_bytes: 0,
            queries: 0,
            capped: false,
            latencies: Default::default(),
            sample_reservoir: Vec::new(),
            sample_seen: 0,
            rng: Xoshiro256::from_seed(stream_seed(seed, StreamKind::Verify, client as u64)),
        }
    }

    fn observe_written(&mut self, p: &DataPoint, cap: usize) {
        self.sample_seen += 1;
        if self.sample_reservoir.len() < cap {
            self.sample_reservoir.push(p.clone());
        } else {
            let j = self.rng.below(self.sample_seen) as usize;
            if j < cap {
                self.sample_reservoir[j] = p.clone();
            }
        }
    }
}

fn execute_run(
    cfg: &RunConfig,
    opts: &RunOptions,
    clients: &mut [ClientWorkload],
    adapter: &Arc<dyn SutAdapter>,
    window: &Arc<ObservedWindow>,
    flavor: RunFlavor,
) -> ExecOutcome {
    let k = clients.len();
    let measured = matches!(flavor, RunFlavor::Measured { .. });
    let (boundary, standby) = match flavor {
        RunFlavor::Measured { boundary_seconds, scale_out_client } => {
            (Some(boundary_seconds), Some(scale_out_client))
        }
        RunFlavor::Warmup { .. } => (None, None),
    };
    let cap = match flavor {
        RunFlavor::Warmup { cap_seconds } if cap_seconds > 0.0 => {
            Some(Duration::from_secs_f64(cap_seconds))
        }
        _ => None,
    };
    let sample_cap = if measured { VERIFY_SAMPLE_TARGET / k + 64 } else { 0 };

    // 0 = stable phase, 1 = scale-out phase.
    let phase = AtomicU8::new(0);
    let failed = AtomicBool::new(false);
    let failure_msg: Mutex<Option<String>> = Mutex::new(None);
    let done_clients = AtomicU64::new(0);
    let acked_points: Vec<AtomicU64> = (0..k).map(|_| AtomicU64::new(0)).collect();
    let acked_bytes: Vec<AtomicU64> = (0..k).map(|_| AtomicU64::new(0)).collect();
    let query_count: Vec<AtomicU64> = (0..k).map(|_| AtomicU64::new(0)).collect();
    let locals: Mutex<Vec<Option<ClientLocal>>> = Mutex::new((0..k).map(|_| None).collect());

    if opts.progress {
        let groups: Vec<String> = (0..k as u32)
            .map(|c| format!("{c}@i{}", instance_of(c, cfg.instances)))
            .collect();
        println!(
            "run start: {} clients across {} driver instance(s) [{}]",
            k,
            cfg.instances,
            groups.join(" ")
        );
    }
    let run_start = Instant::now();
    let tick = Duration::from_millis(cfg.scheduler_tick_ms.max(1));
    let pace = cfg.client_rate;
    let seed = cfg.seed;

    let mut trigger = None;
    let progress_done = AtomicBool::new(false);

    std::thread::scope(|scope| {
        for (idx, wl) in clients.iter_mut().enumerate() {
            let phase = &phase;
            let failed = &failed;
            let failure_msg = &failure_msg;
            let done_clients = &done_clients;
            let acked_points = &acked_points;
            let acked_bytes = &acked_bytes;
            let query_count = &query_count;
            let locals = &locals;
            let adapter = adapter.clone();
            let window = window.clone();
            let wait_for_phase = standby == Some(idx);
            scope.spawn(move || {
                let mut local = ClientLocal::new(seed, idx as u32);
                if wait_for_phase {
                    while phase.load(Ordering::Acquire) == 0 && !failed.load(Ordering::Acquire) {
                        std::thread::sleep(Duration::from_millis(2));
                    }
                }
                // Pacing is relative to this client's activation, so the
                // standby client ramps at the same rate once released.
                let pace_start = Instant::now();
                loop {
                    if failed.load(Ordering::Acquire) {
                        break;
                    }
                    if let Some(cap) = cap {
                        if run_start.elapsed() >= cap {
                            local.capped = true;
                            break;
                        }
                    }
                    let Some(op) = wl.next_op(&window) else { break };
                    match op.kind {
                        OpKind::Write(batch) => {
                            if pace > 0.0 {
                                let deadline = pace_start
                                    + Duration::from_secs_f64(local.issued_points as f64 / pace);
                                if let Some(wait) = deadline.checked_duration_since(Instant::now())
                                {
                                    std::thread::sleep(wait);
                                }
                            }
                            local.issued_points += batch.len() as u64;
                            local.issued_bytes +=
                                batch.iter().map(|p| p.encoded_size()).sum::<u64>();
                            match adapter.insert(&batch) {
                                Ok(ack) => {
                                    acked_points[idx].fetch_add(ack.points, Ordering::AcqRel);
                                    acked_bytes[idx].fetch_add(ack.bytes, Ordering::AcqRel);
                                    if let (Some(first), Some(last)) =
                                        (batch.first(), batch.last())
                                    {
                                        window.record(first.timestamp_ms, last.timestamp_ms);
                                    }
                                    if sample_cap > 0 {
                                        for p in &batch {
                                            local.observe_written(p, sample_cap);
                                        }
                                    }
                                }
                                Err(e) => {
                                    *failure_msg.lock().unwrap() =
                                        Some(format!("client {idx} insert: {e}"));
                                    failed.store(true, Ordering::Release);
                                    break;
                                }
                            }
                        }
                        OpKind::Query(spec) => {
                            let q_start = Instant::now();
                            match adapter.query(&spec) {
                                Ok(_rows) => {
                                    let ms = q_start.elapsed().as_secs_f64() * 1e3;
                                    local.latencies[spec.template.index()]
                                        .record(ms, &mut local.rng);
                                    local.queries += 1;
                                    query_count[idx].fetch_add(1, Ordering::AcqRel);
                                }
                                Err(e) => {
                                    *failure_msg.lock().unwrap() =
                                        Some(format!("client {idx} query: {e}"));
                                    failed.store(true, Ordering::Release);
                                    break;
                                }
                            }
                        }
                    }
                }
                done_clients.fetch_add(1, Ordering::AcqRel);
                locals.lock().unwrap()[idx] = Some(local);
            });
        }

        // Progress logger.
        if opts.progress {
            let interval = Duration::from_secs_f64(cfg.progress_interval_seconds.max(0.5));
            let phase = &phase;
            let acked_points = &acked_points;
            let acked_bytes = &acked_bytes;
            let query_count = &query_count;
            let progress_done = &progress_done;
            scope.spawn(move || {
                let mut last_queries = 0u64;
                loop {
                    std::thread::sleep(interval);
                    if progress_done.load(Ordering::Acquire) {
                        break;
                    }
                    let points: u64 = acked_points.iter().map(|a| a.load(Ordering::Acquire)).sum();
                    let bytes: u64 = acked_bytes.iter().map(|a| a.load(Ordering::Acquire)).sum();
                    let queries: u64 = query_count.iter().map(|a| a.load(Ordering::Acquire)).sum();
                    let qps = (queries - last_queries) as f64 / interval.as_secs_f64();
                    last_queries = queries;
                    let label = if !measured {
                        "warmup"
                    } else if phase.load(Ordering::Acquire) == 0 {
                        "stable"
                    } else {
                        "scaleout"
                    };
                    println!("phase={label} points={points} bytes={bytes} qps={qps:.1}");
                }
            });
        }

        // Coordinator: trigger the scale-out at the stable-phase boundary.
        if let Some(boundary_seconds) = boundary {
            let deadline = run_start + Duration::from_secs_f64(boundary_seconds);
            loop {
                if failed.load(Ordering::Acquire) {
                    break;
                }
                let now = Instant::now();
                match deadline.checked_duration_since(now) {
                    Some(rem) => std::thread::sleep(rem.min(tick)),
                    None => break,
                }
            }
            if !failed.load(Ordering::Acquire) {
                let wall_seconds_at = run_start.elapsed().as_secs_f64();
                let per_client: Vec<u64> =
                    acked_points.iter().map(|a| a.load(Ordering::Acquire)).collect();
                let total = per_client.iter().sum();
                let nodes_before = adapter.descriptor().nodes;
                let outcome = adapter.scale_out().map_err(|e| e.to_string());
                if let Err(e) = &outcome {
                    *failure_msg.lock().unwrap() = Some(format!("scale-out: {e}"));
                    failed.store(true, Ordering::Release);
                }
                trigger = Some(Trigger {
                    wall_seconds_at,
                    per_client_points: per_client,
                    total_points: total,
                    nodes_before,
                    scale_outcome: outcome,
                });
                phase.store(1, Ordering::Release);
            } else {
                // Unblock the standby client.
                phase.store(1, Ordering::Release);
            }
        }

        // Wait for the workers, then stop the logger.
        while done_clients.load(Ordering::Acquire) < k as u64 {
            std::thread::sleep(Duration::from_millis(2));
        }
        progress_done.store(true, Ordering::Release);
    });

    let wall_seconds = run_start.elapsed().as_secs_f64();
    let mut locals = locals.into_inner().unwrap();
    let mut out = ExecOutcome {
        wall_seconds,
        capped: false,
        issued_points: 0,
        issued_bytes: 0,
        acked_points: 0,
        acked_bytes: 0,
        queries: 0,
        per_client_acked: acked_points.iter().map(|a| a.load(Ordering::Acquire)).collect(),
        trigger,
        latencies: Default::default(),
        samples: Vec::new(),
        failure: failure_msg.into_inner().unwrap(),
    };
    let mut samples = Vec::new();
    for local in locals.iter_mut().filter_map(Option::take) {
        out.issued_points += local.issued_points;
        out.issued_bytes += local.issued_bytes;
        out.queries += local.queries;
        out.capped |= local.capped;
        for (i, acc) in local.latencies.into_iter().enumerate() {
            out.latencies[i].merge(acc);
        }
        samples.extend(local.sample_reservoir);
    }
    // Deterministic trim of the merged verification sample.
    if samples.len() > VERIFY_SAMPLE_TARGET {
        let step = samples.len() as f64 / VERIFY_SAMPLE_TARGET as f64;
        samples = (0..VERIFY_SAMPLE_TARGET)
            .map(|i| samples[(i as f64 * step) as usize].clone())
            .collect();
    }
    out.samples = samples;
    out.acked_points = out.per_client_acked.iter().sum();
    out.acked_bytes = acked_bytes.iter().map(|a| a.load(Ordering::Acquire)).sum();
    out
}

fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(SystemTime::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}
