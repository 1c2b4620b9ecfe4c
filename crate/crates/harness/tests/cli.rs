//! CLI surface tests: exit codes, override precedence, sweep artifacts and
//! report inspection, all through the real binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tsbench"))
}

fn run_ok(args: &[&str], extra: &[&Path]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    for p in extra {
        cmd.arg(p);
    }
    cmd.output().expect("binary runs")
}

#[test]
fn check_config_accepts_a_valid_desk_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ok.conf");
    std::fs::write(&cfg, "records=1000\ndesk_scale=true\nmin_run_seconds=10\n").unwrap();
    let out = bin()
        .args(["check-config", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[PASS] config-invariants"));
    assert!(stdout.contains("[PASS] min-run-duration"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // Unknown key.
    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "records=1000\nwarp_factor=9\n").unwrap();
    let out = run_ok(&["check-config", "--config"], &[&bad]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warp_factor"));

    // Missing required key.
    let missing = dir.path().join("missing.conf");
    std::fs::write(&missing, "clients=3\n").unwrap();
    let out = run_ok(&["check-config", "--config"], &[&missing]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("records"));

    // Nonexistent file.
    let out = run_ok(&["check-config", "--config"], &[&dir.path().join("ghost.conf")]);
    assert_eq!(out.status.code(), Some(2));

    // Full-scale floor violation is a failing named check.
    let floor = dir.path().join("floor.conf");
    std::fs::write(&floor, "records=1000\nmin_run_seconds=60\n").unwrap();
    let out = run_ok(&["check-config", "--config"], &[&floor]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] min-run-duration"));
}

#[test]
fn flag_overrides_take_precedence_over_the_file() {
    let dir = tempfile::tempdir().unwrap();
    // clients=1 is invalid; the --clients flag must repair it.
    let cfg = dir.path().join("override.conf");
    std::fs::write(&cfg, "records=1000\nclients=1\ndesk_scale=true\nmin_run_seconds=10\n")
        .unwrap();
    let out = run_ok(&["check-config", "--config"], &[&cfg]);
    assert_eq!(out.status.code(), Some(2), "clients=1 must be rejected");

    let out = bin()
        .args(["check-config", "--clients", "5", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_outputs_are_byte_identical_across_reruns() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [dir_a.path(), dir_b.path()] {
        let out = run_ok(&["sweep-scalability", "--out"], &[dir]);
        assert_eq!(out.status.code(), Some(0));
        let out = run_ok(&["sweep-cost", "--out"], &[dir]);
        assert_eq!(out.status.code(), Some(0));
    }
    for name in ["scalability.csv", "cost_curve.csv", "price_performance.csv"] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
        assert!(!a.is_empty());
    }
}

#[test]
fn sweep_cost_rejects_bad_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["sweep-cost", "--ratios", "1,0,-3", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn show_report_round_trips_an_emitted_document() {
    use tsbench::report::*;
    let report = BenchmarkReport {
        schema_version: 1,
        harness_version: "test".into(),
        started_unix_ms: 1_700_000_000_000,
        finished_unix_ms: 1_700_000_060_000,
        desk_scale: true,
        config: [("records".to_string(), "42".to_string())].into_iter().collect(),
        allocation: vec![2, 1],
        iterations: vec![],
        metrics: None,
        checks: vec![CheckOutcome::fail("inserted-check-1", "deficit 3 points")],
        failure_stage: None,
    };
    let dir = tempfile::tempdir().unwrap();
    let (path, summary) = emit_report(&report, dir.path()).unwrap();
    assert_eq!(parse_report_file(&path).unwrap(), report);
    // The summary names the failing check.
    let text = std::fs::read_to_string(summary).unwrap();
    assert!(text.contains("inserted-check-1"));

    let out = run_ok(&["show-report"], &[&path]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("inserted-check-1"));
    assert!(stdout.contains("FAIL"));

    // Unparseable report.
    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{not json").unwrap();
    let out = run_ok(&["show-report"], &[&junk]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["sweep-scalability"])
        .env("TSBENCH_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("scalability.csv").is_file());
}
