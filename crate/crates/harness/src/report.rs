//! Benchmark report: the structured document emitted after every run
//! (passing or failing), plus a human-readable summary.
//!
//! The document is JSON with a fixed schema (`schema_version` 1) and stable
//! key order (struct declaration order). `parse_report(emit_report(r))`
//! round-trips exactly. File names embed the run's UTC start timestamp.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("cannot write report {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse report: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl CheckOutcome {
    pub fn pass(name: &str, detail: impl Into<String>) -> Self {
        CheckOutcome { name: name.into(), status: CheckStatus::Pass, detail: detail.into() }
    }

    pub fn fail(name: &str, detail: impl Into<String>) -> Self {
        CheckOutcome { name: name.into(), status: CheckStatus::Fail, detail: detail.into() }
    }

    pub fn skipped(name: &str, detail: impl Into<String>) -> Self {
        CheckOutcome { name: name.into(), status: CheckStatus::Skipped, detail: detail.into() }
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

/// Latency summary for one query template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateLatency {
    pub template: String,
    pub count: u64,
    pub mean_ms: f64,
    pub p95_ms: f64,
}

/// Counters and wall-clock times for one measured workload-execution run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseStats {
    /// Points ingested in the stable phase, `n_0`.
    pub stable_points: u64,
    /// Points ingested in the scale-out phase, `n_s`.
    pub scaleout_points: u64,
    /// Stable-phase duration `t_0`, seconds.
    pub stable_seconds: f64,
    /// Scale-out-phase duration `t_s`, seconds.
    pub scaleout_seconds: f64,
    /// Value-payload bytes ingested during the measured run.
    pub ingested_bytes: u64,
    pub queries: u64,
    pub per_client_budget: Vec<u64>,
    /// Per-client ingested points at the scale-out trigger.
    pub per_client_points_at_trigger: Vec<u64>,
    pub query_latency: Vec<TemplateLatency>,
    /// Wall-clock phase durations as scheduled by the driver. These equal
    /// `stable_seconds`/`scaleout_seconds` on wall-timed adapters; for the
    /// modeled SUT the canonical values above are law-derived and these
    /// retain the raw measurements.
    pub wall_stable_seconds: f64,
    pub wall_scaleout_seconds: f64,
}

impl PhaseStats {
    pub fn total_points(&self) -> u64 {
        self.stable_points + self.scaleout_points
    }

    pub fn run_seconds(&self) -> f64 {
        self.stable_seconds + self.scaleout_seconds
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmupStats {
    pub seconds: f64,
    pub points: u64,
    pub bytes: u64,
    pub queries: u64,
    /// True when the warmup hit its wall-clock cap before exhausting the
    /// record budget.
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPhase {
    pub fit_seconds: f64,
    pub sample_points: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleOutReport {
    pub performed: bool,
    pub nodes_before: u32,
    pub nodes_after: u32,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataCheckReport {
    pub inserted: CheckOutcome,
    pub disk: CheckOutcome,
    /// On-disk bytes after the measured run, `S_d`.
    pub disk_bytes: u64,
    /// Value-payload bytes ingested across the whole iteration (warmup and
    /// measured run), `S_i` for the compression ratio.
    pub ingested_bytes: u64,
    pub cross_client: CheckOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub index: u32,
    pub model_phase: Option<ModelPhase>,
    pub warmup: WarmupStats,
    pub measured: PhaseStats,
    /// Measured run duration `T_i` (stable + scale-out phases).
    pub run_seconds: f64,
    pub scale_out: ScaleOutReport,
    pub data_check: DataCheckReport,
    pub valid: bool,
    /// SUT failure detail when the iteration aborted mid-run.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// Points per second over the longer measured run.
    pub iotps: f64,
    pub kiotps: f64,
    /// Which iteration was the performance run (1 or 2).
    pub performance_run: u32,
    pub t1_seconds: f64,
    pub t2_seconds: f64,
    pub ingested_bytes: u64,
    pub disk_bytes: u64,
    pub compression_ratio: f64,
    pub storage_cost_usd: f64,
    pub system_cost_usd: f64,
    pub total_cost_usd: f64,
    pub usd_per_kiotps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub schema_version: u32,
    pub harness_version: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub desk_scale: bool,
    /// Verbatim echo of every config key.
    pub config: BTreeMap<String, String>,
    /// Per-client record budgets; the scale-out client is last.
    pub allocation: Vec<u64>,
    pub iterations: Vec<IterationResult>,
    pub metrics: Option<MetricsReport>,
    /// Flattened check list: prerequisites, per-iteration gates and data
    /// checks, and the skipped replica check.
    pub checks: Vec<CheckOutcome>,
    /// Set when the benchmark aborted, naming the failing stage.
    pub failure_stage: Option<String>,
}

impl BenchmarkReport {
    pub fn all_checks_pass(&self) -> bool {
        self.failure_stage.is_none() && !self.checks.iter().any(CheckOutcome::failed)
    }

    /// Process exit code: 0 all checks pass, 1 benchmark-invalidating
    /// failure, 2 config/prerequisite error.
    pub fn exit_code(&self) -> i32 {
        if self.failure_stage.as_deref() == Some("prerequisite") {
            2
        } else if !self.all_checks_pass() {
            1
        } else {
            0
        }
    }

    pub fn total_points(&self) -> u64 {
        self.iterations.first().map(|i| i.measured.total_points()).unwrap_or(0)
    }
}

pub fn emit_report_string(report: &BenchmarkReport) -> String {
    serde_json::to_string_pretty(report).expect("report serializes")
}

pub fn parse_report(text: &str) -> Result<BenchmarkReport, ReportError> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_report_file(path: &Path) -> Result<BenchmarkReport, ReportError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ReportError::Io { path: path.to_path_buf(), source })?;
    parse_report(&text)
}

/// Write the report document and its human-readable summary into `dir`.
/// Returns (report path, summary path).
pub fn emit_report(report: &BenchmarkReport, dir: &Path) -> Result<(PathBuf, PathBuf), ReportError> {
    std::fs::create_dir_all(dir)
        .map_err(|source| ReportError::Io { path: dir.to_path_buf(), source })?;
    let stamp = utc_stamp(report.started_unix_ms / 1000);
    let report_path = dir.join(format!("report-{stamp}.json"));
    let summary_path = dir.join(format!("summary-{stamp}.txt"));
    std::fs::write(&report_path, emit_report_string(report))
        .map_err(|source| ReportError::Io { path: report_path.clone(), source })?;
    std::fs::write(&summary_path, render_summary(report))
        .map_err(|source| ReportError::Io { path: summary_path.clone(), source })?;
    Ok((report_path, summary_path))
}

/// `YYYYMMDD-HHMMSS` in UTC from Unix seconds (civil-from-days algorithm).
pub fn utc_stamp(unix_seconds: u64) -> String {
    let days = unix_seconds / 86_400;
    let secs = unix_seconds % 86_400;
    let (h, m, s) = (secs / 3600, (secs / 60) % 60, secs % 60);

    let z = days as i64 + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let year = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = doy - (153 * mp + 2) / 5 + 1;
    let month = if mp < 10 { mp + 3 } else { mp - 9 };
    let year = if month <= 2 { year + 1 } else { year };
    format!("{year:04}{month:02}{day:02}-{h:02}{m:02}{s:02}")
}

pub fn render_summary(report: &BenchmarkReport) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "tsbench report (schema v{})", report.schema_version);
    let _ = writeln!(
        out,
        "mode: {}",
        if report.desk_scale { "desk-scale" } else { "full-scale" }
    );
    let cfg = &report.config;
    let get = |k: &str| cfg.get(k).map(String::as_str).unwrap_or("?");
    let _ = writeln!(
        out,
        "config: adapter={} sensors={} clients={} records={} seed={}",
        get("sut.adapter"),
        get("sensors"),
        get("clients"),
        get("records"),
        get("seed"),
    );
    let _ = writeln!(out, "allocation: {:?} (scale-out client last)", report.allocation);

    for it in &report.iterations {
        let _ = writeln!(out, "\niteration {}:", it.index);
        if let Some(mp) = &it.model_phase {
            let _ = writeln!(
                out,
                "  model phase: fitted {} sample points in {:.3} s",
                mp.sample_points, mp.fit_seconds
            );
        }
        let _ = writeln!(
            out,
            "  warmup: {:.3} s, {} points, {} bytes{}",
            it.warmup.seconds,
            it.warmup.points,
            it.warmup.bytes,
            if it.warmup.capped { " (capped)" } else { "" }
        );
        let m = &it.measured;
        let _ = writeln!(
            out,
            "  measured: T={:.3} s  n0={} t0={:.3} s  ns={} ts={:.3} s  bytes={} queries={}",
            it.run_seconds,
            m.stable_points,
            m.stable_seconds,
            m.scaleout_points,
            m.scaleout_seconds,
            m.ingested_bytes,
            m.queries
        );
        let _ = writeln!(
            out,
            "  scale-out: {} ({} -> {} nodes) {}",
            if it.scale_out.performed { "performed" } else { "skipped" },
            it.scale_out.nodes_before,
            it.scale_out.nodes_after,
            it.scale_out.detail
        );
        for check in [&it.data_check.inserted, &it.data_check.disk, &it.data_check.cross_client] {
            let _ = writeln!(out, "  {}", render_check(check));
        }
        let _ = writeln!(
            out,
            "  volumes: S_i={} B  S_d={} B",
            it.data_check.ingested_bytes, it.data_check.disk_bytes
        );
    }

    match &report.metrics {
        Some(m) => {
            let _ = writeln!(out, "\nmetrics:");
            let _ = writeln!(
                out,
                "  IoTps={:.3} ({:.6} kIoTps), performance run = iteration {} (T1={:.3} s, T2={:.3} s)",
                m.iotps, m.kiotps, m.performance_run, m.t1_seconds, m.t2_seconds
            );
            let _ = writeln!(out, "  compression ratio r={:.6}", m.compression_ratio);
            let _ = writeln!(
                out,
                "  cost: storage=${:.2} system=${:.2} total=${:.2}  price/performance=${:.4}/kIoTps",
                m.storage_cost_usd, m.system_cost_usd, m.total_cost_usd, m.usd_per_kiotps
            );
        }
        None => {
            let _ = writeln!(out, "\nmetrics: not computed");
        }
    }

    let _ = writeln!(out, "\nchecks:");
    for check in &report.checks {
        let _ = writeln!(out, "  {}", render_check(check));
    }
    if let Some(stage) = &report.failure_stage {
        let _ = writeln!(out, "\nFAILED at stage: {stage}");
    }
    let _ = writeln!(
        out,
        "\noverall: {}",
        if report.all_checks_pass() { "PASS" } else { "FAIL" }
    );
    out
}

fn render_check(check: &CheckOutcome) -> String {
    let tag = match check.status {
        CheckStatus::Pass => "PASS",
        CheckStatus::Fail => "FAIL",
        CheckStatus::Skipped => "SKIP",
    };
    if check.detail.is_empty() {
        format!("[{tag}] {}", check.name)
    } else {
        format!("[{tag}] {}: {}", check.name, check.detail)
    }
}
