//! Command-line interface.
//!
//! Commands: `run`, `sweep-scalability`, `sweep-cost`, `check-config`,
//! `show-report`. The output directory resolves from `--out`, then the
//! `TSBENCH_OUT_DIR` environment variable, then `./tsbench-out`.
//!
//! Exit codes: 0 all checks pass, 1 benchmark-invalidating failure,
//! 2 config error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, RunConfig};
use crate::driver::{self, RunOptions};
use crate::report;
use crate::sweep;

pub const OUT_DIR_ENV: &str = "TSBENCH_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "tsbench",
    version,
    about = "Benchmark harness for IoT time-series databases"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Properties file (`key=value` lines, `#` comments).
    #[arg(long)]
    config: PathBuf,
    /// Override any config key, repeatable: `--set clients=5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Shorthand for `--set clients=N`.
    #[arg(long)]
    clients: Option<u32>,
    /// Shorthand for `--set records=N`.
    #[arg(long)]
    records: Option<u64>,
    /// Shorthand for `--set sensors=N`.
    #[arg(long)]
    sensors: Option<u32>,
    /// Shorthand for `--set seed=N`.
    #[arg(long)]
    seed: Option<u64>,
    /// Shorthand for `--set desk_scale=true`.
    #[arg(long)]
    desk_scale: bool,
}

impl ConfigArgs {
    fn overrides(&self) -> Vec<String> {
        let mut overrides = self.set.clone();
        if let Some(v) = self.clients {
            overrides.push(format!("clients={v}"));
        }
        if let Some(v) = self.records {
            overrides.push(format!("records={v}"));
        }
        if let Some(v) = self.sensors {
            overrides.push(format!("sensors={v}"));
        }
        if let Some(v) = self.seed {
            overrides.push(format!("seed={v}"));
        }
        if self.desk_scale {
            overrides.push("desk_scale=true".into());
        }
        overrides
    }

    fn load(&self) -> Result<RunConfig, String> {
        parse_config(&self.config, &self.overrides()).map_err(|e| e.to_string())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full benchmark procedure and write the report.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output directory for reports and the reference store.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppress the periodic progress log.
        #[arg(long)]
        quiet: bool,
    },
    /// Evaluate the analytic scalability model over a node-count grid.
    SweepScalability {
        /// Baseline throughput in kIoTps.
        #[arg(long, default_value_t = 4100.0)]
        base_kiotps: f64,
        /// Evaluate node counts 1..=M.
        #[arg(long, default_value_t = 10)]
        m_max: u32,
        /// Curve series, repeatable: `--series 0.9:decaying`.
        #[arg(long, value_name = "W_S:MODE")]
        series: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate storage/total cost and price-performance over compression
    /// ratios.
    SweepCost {
        /// Sustained throughput in kIoTps.
        #[arg(long, default_value_t = 4100.0)]
        kiotps: f64,
        /// Comma-separated compression ratios.
        #[arg(long, default_value = "1,2,5,10,20,50,100")]
        ratios: String,
        /// Non-storage system cost before scale-out, dollars.
        #[arg(long, default_value_t = 300000.0)]
        c0: f64,
        /// Non-storage system cost after scale-out, dollars.
        #[arg(long, default_value_t = 300000.0)]
        cs: f64,
        /// Storage price per 16-byte record, dollars.
        #[arg(long, default_value_t = 2.039e-8)]
        per_record: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse a config, run the prerequisite checks, and print them.
    CheckConfig {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pretty-print a previously written report document.
    ShowReport {
        /// Path to a `report-*.json` file.
        report: PathBuf,
    },
}

fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("tsbench-out"))
}

/// Entry point; returns the process exit code.
pub fn main_impl() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, quiet } => {
            let cfg = match config.load() {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return 2;
                }
            };
            let opts =
                RunOptions { out_dir: resolve_out_dir(out), progress: !quiet };
            let report = driver::run_benchmark(&cfg, &opts);
            match report::emit_report(&report, &opts.out_dir) {
                Ok((report_path, summary_path)) => {
                    print!("{}", report::render_summary(&report));
                    println!("report:  {}", report_path.display());
                    println!("summary: {}", summary_path.display());
                }
                Err(e) => {
                    eprintln!("cannot write report: {e}");
                    return 1;
                }
            }
            report.exit_code()
        }
        Command::SweepScalability { base_kiotps, m_max, series, out } => {
            let parsed: Result<Vec<sweep::Series>, String> =
                series.iter().map(|s| sweep::Series::parse(s)).collect();
            let series = match parsed {
                Ok(v) if v.is_empty() => sweep::ScalabilitySweep::default().series,
                Ok(v) => v,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return 2;
                }
            };
            let csv = sweep::scalability_csv(&sweep::ScalabilitySweep {
                base_kiotps,
                m_max,
                series,
            });
            write_artifact(resolve_out_dir(out), "scalability.csv", &csv)
        }
        Command::SweepCost { kiotps, ratios, c0, cs, per_record, out } => {
            let ratios: Result<Vec<f64>, _> =
                ratios.split(',').map(|r| r.trim().parse::<f64>()).collect();
            let ratios = match ratios {
                Ok(v) if v.iter().all(|r| *r > 0.0) => v,
                _ => {
                    eprintln!("config error: --ratios must be positive numbers");
                    return 2;
                }
            };
            let cost = tsbench_core::metrics::CostModel {
                system_cost_before_usd: c0,
                system_cost_after_usd: cs,
                per_record_storage_usd: per_record,
                ..Default::default()
            };
            let sweep_cfg = sweep::CostSweep { kiotps, ratios, cost };
            let dir = resolve_out_dir(out);
            let code = write_artifact(dir.clone(), "cost_curve.csv", &sweep::cost_csv(&sweep_cfg));
            if code != 0 {
                return code;
            }
            match sweep::price_csv(&sweep_cfg) {
                Ok(csv) => write_artifact(dir, "price_performance.csv", &csv),
                Err(e) => {
                    eprintln!("config error: {e}");
                    2
                }
            }
        }
        Command::CheckConfig { config, out } => {
            let cfg = match config.load() {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return 2;
                }
            };
            let out_dir = resolve_out_dir(out);
            let checks = driver::checks::prerequisite_checks(&cfg, &out_dir);
            let mut failed = false;
            for check in &checks {
                let tag = match check.status {
                    report::CheckStatus::Pass => "PASS",
                    report::CheckStatus::Fail => {
                        failed = true;
                        "FAIL"
                    }
                    report::CheckStatus::Skipped => "SKIP",
                };
                println!("[{tag}] {}: {}", check.name, check.detail);
            }
            if failed {
                2
            } else {
                0
            }
        }
        Command::ShowReport { report: path } => match report::parse_report_file(&path) {
            Ok(doc) => {
                print!("{}", report::render_summary(&doc));
                0
            }
            Err(e) => {
                eprintln!("cannot read report: {e}");
                2
            }
        },
    }
}

fn write_artifact(dir: PathBuf, name: &str, contents: &str) -> i32 {
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("cannot create {}: {e}", dir.display());
        return 1;
    }
    let path = dir.join(name);
    match std::fs::write(&path, contents) {
        Ok(()) => {
            println!("wrote {}", path.display());
            0
        }
        Err(e) => {
            eprintln!("cannot write {}: {e}", path.display());
            1
        }
    }
}
