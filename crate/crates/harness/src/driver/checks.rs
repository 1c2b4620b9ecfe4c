//! Prerequisite checks and post-run gates.

use std::path::Path;
use std::time::Instant;

use crate::config::{GenMethod, RunConfig};
use crate::report::CheckOutcome;
use crate::sut;

/// Smallest run floor the desk-scale profile may configure.
pub const DESK_MIN_RUN_SECONDS: f64 = 5.0;

/// Full-scale minimum measured-run duration.
pub const FULL_MIN_RUN_SECONDS: f64 = 1_800.0;

/// Conformity checks executed before the benchmark run. Each
/// failing check names itself and carries a remediation hint.
pub fn prerequisite_checks(cfg: &RunConfig, out_dir: &Path) -> Vec<CheckOutcome> {
    let mut checks = Vec::new();

    checks.push(match cfg.validate() {
        Ok(()) => CheckOutcome::pass("config-invariants", ""),
        Err(e) => CheckOutcome::fail("config-invariants", e),
    });

    checks.push(if sut::adapter_known(&cfg.sut.adapter) {
        CheckOutcome::pass("sut-adapter", &cfg.sut.adapter)
    } else {
        CheckOutcome::fail(
            "sut-adapter",
            format!("unknown adapter `{}`; known: {:?}", cfg.sut.adapter, sut::ADAPTERS),
        )
    });

    checks.push(match writable_dir(out_dir) {
        Ok(()) => CheckOutcome::pass("output-dir", out_dir.display().to_string()),
        Err(e) => CheckOutcome::fail(
            "output-dir",
            format!("{} not writable ({e}); pass --out or set TSBENCH_OUT_DIR", out_dir.display()),
        ),
    });

    let t0 = Instant::now();
    let t1 = Instant::now();
    checks.push(if t1 >= t0 {
        CheckOutcome::pass("clock", "monotonic clock present")
    } else {
        CheckOutcome::fail("clock", "monotonic clock went backwards")
    });

    checks.push(min_run_config_check(cfg));

    if matches!(cfg.datagen.method, GenMethod::Replay | GenMethod::Model) {
        let outcome = match &cfg.datagen.sample_file {
            Some(path) if path.is_file() => {
                CheckOutcome::pass("sample-file", path.display().to_string())
            }
            Some(path) => CheckOutcome::fail(
                "sample-file",
                format!("{} does not exist; point datagen.sample_file at a CSV sample", path.display()),
            ),
            None => CheckOutcome::fail(
                "sample-file",
                "datagen.sample_file is required for sample-based methods".to_string(),
            ),
        };
        checks.push(outcome);
    }

    checks
}

fn min_run_config_check(cfg: &RunConfig) -> CheckOutcome {
    if cfg.desk_scale {
        if cfg.min_run_seconds >= DESK_MIN_RUN_SECONDS {
            CheckOutcome::pass(
                "min-run-duration",
                format!("desk-scale floor relaxed to {} s", cfg.min_run_seconds),
            )
        } else {
            CheckOutcome::fail(
                "min-run-duration",
                format!(
                    "desk-scale still requires min_run_seconds >= {DESK_MIN_RUN_SECONDS}, got {}",
                    cfg.min_run_seconds
                ),
            )
        }
    } else if cfg.min_run_seconds == FULL_MIN_RUN_SECONDS {
        CheckOutcome::pass("min-run-duration", format!("{FULL_MIN_RUN_SECONDS} s"))
    } else {
        CheckOutcome::fail(
            "min-run-duration",
            format!(
                "full-scale runs must use min_run_seconds = {FULL_MIN_RUN_SECONDS}, got {}; \
                 set desk_scale=true for shorter development runs",
                cfg.min_run_seconds
            ),
        )
    }
}

fn writable_dir(dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let probe = dir.join(".tsbench-probe");
    std::fs::write(&probe, b"probe")?;
    std::fs::remove_file(&probe)?;
    Ok(())
}

/// The data-inserted check: the harness ledger of issued writes must match
/// the acknowledged totals exactly.
pub fn inserted_outcome(
    issued_points: u64,
    issued_bytes: u64,
    acked_points: u64,
    acked_bytes: u64,
) -> CheckOutcome {
    if issued_points == acked_points && issued_bytes == acked_bytes {
        CheckOutcome::pass(
            "inserted-check",
            format!("{acked_points} points / {acked_bytes} bytes acknowledged"),
        )
    } else {
        CheckOutcome::fail(
            "inserted-check",
            format!(
                "ledger {issued_points} points/{issued_bytes} B vs acknowledged \
                 {acked_points} points/{acked_bytes} B (deficit {} points)",
                issued_points as i64 - acked_points as i64
            ),
        )
    }
}

/// The minimum per-sensor ingestion-rate gate:
/// passes iff `N_p / (m_s * T_i) >= min_rate`.
pub fn min_rate_outcome(
    name: &str,
    total_points: u64,
    sensors: u32,
    run_seconds: f64,
    min_rate: f64,
) -> CheckOutcome {
    let rate = total_points as f64 / (sensors as f64 * run_seconds);
    if rate >= min_rate {
        CheckOutcome::pass(name, format!("{rate:.2} points/s/sensor >= {min_rate}"))
    } else {
        CheckOutcome::fail(
            name,
            format!(
                "{rate:.2} points/s/sensor < {min_rate}; raise records or lower sensors"
            ),
        )
    }
}
