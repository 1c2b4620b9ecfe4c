//! Performance and price/performance metrics, plus the analytic scalability
//! model behind the evaluation curves.
//!
//! - `IoTps = N_p / max(T_1, T_2)`: total ingested points over the longer of
//!   the two measured runs.
//! - Compression ratio `r = S_i / S_d`: ingested bytes over on-disk bytes.
//! - Storage cost: one year of ingestion (`17520` half-hour intervals of
//!   `1800` s) priced per uncompressed record and divided by `r`.
//! - System cost `C_S = c_0/2 + c_s/2`: the non-storage cost averaged over
//!   the pre- and post-scale-out topologies.
//! - `$/kIoTps = (C_S + storage) / (IoTps / 1000)`.
//!
//! The scalability model evaluates the throughput of a run whose stable
//! phase sustains rate `R` on `m` nodes and whose scale-out phase runs at
//! `R * (m+1)/m * w_eff`, where `w_eff` is the linearity factor `w_s`
//! (linear mode) or `w_s^m` (decaying mode).

use alloc::format;

use crate::error::{Error, Result};

/// Half-hour intervals in a year of retention: 2 * 24 * 365.
pub const INTERVAL_WEIGHT: f64 = 17_520.0;

/// Seconds per measurement interval (30 minutes).
pub const INTERVAL_SECONDS: f64 = 1_800.0;

/// Record size the per-record storage price is quoted against.
pub const BASE_RECORD_BYTES: f64 = 16.0;

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Ingested vs on-disk volume for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressionStats {
    pub ingested_bytes: u64,
    pub disk_bytes: u64,
}

impl CompressionStats {
    pub fn ratio(&self) -> Result<f64> {
        compression_ratio(self.ingested_bytes, self.disk_bytes)
    }
}

/// `r = S_i / S_d`.
pub fn compression_ratio(ingested_bytes: u64, disk_bytes: u64) -> Result<f64> {
    if disk_bytes == 0 {
        return Err(Error::ZeroDiskBytes);
    }
    Ok(ingested_bytes as f64 / disk_bytes as f64)
}

/// Cost-model inputs for the price/performance metric.
///
/// `system_cost_before_usd` and `system_cost_after_usd` quote the
/// *non-storage* system cost before and after scale-out; the storage
/// component is priced separately through `per_record_storage_usd` (quoted
/// per `record_bytes`-byte record) and enters the total divided by the
/// achieved compression ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    /// Storage component price, `C_0`.
    pub storage_component_usd: f64,
    /// Storage component capacity in bytes, `S_0`; must cover `S_i`.
    pub storage_capacity_bytes: f64,
    /// Non-storage system cost before scale-out, `c_0`.
    pub system_cost_before_usd: f64,
    /// Non-storage system cost after scale-out, `c_s`.
    pub system_cost_after_usd: f64,
    /// Storage price per uncompressed record of `record_bytes` bytes.
    pub per_record_storage_usd: f64,
    /// Quoted record size; the per-record price scales linearly with it.
    pub record_bytes: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            storage_component_usd: 30_000.0,
            storage_capacity_bytes: 1.6e12,
            system_cost_before_usd: 300_000.0,
            system_cost_after_usd: 300_000.0,
            per_record_storage_usd: 2.039e-8,
            record_bytes: 16.0,
        }
    }
}

impl CostModel {
    /// Enforce `S_0 >= S_i` at metric time.
    pub fn check_capacity(&self, ingested_bytes: u64) -> Result<()> {
        if (ingested_bytes as f64) > self.storage_capacity_bytes {
            return Err(Error::CapacityExceeded {
                capacity_bytes: self.storage_capacity_bytes,
                ingested_bytes: ingested_bytes as f64,
            });
        }
        Ok(())
    }

    /// Non-storage system cost: `c_0/2 + c_s/2`.
    pub fn system_cost(&self) -> f64 {
        0.5 * self.system_cost_before_usd + 0.5 * self.system_cost_after_usd
    }

    fn per_record_effective(&self) -> f64 {
        self.per_record_storage_usd * (self.record_bytes / BASE_RECORD_BYTES)
    }
}

/// `IoTps = N_p / max(T_1, T_2)`.
pub fn iotps(total_points: u64, t1_seconds: f64, t2_seconds: f64) -> Result<f64> {
    if !positive(t1_seconds) || !positive(t2_seconds) {
        return Err(Error::InvalidRun {
            reason: format!("run durations must be positive, got {t1_seconds} and {t2_seconds}"),
        });
    }
    Ok(total_points as f64 / t1_seconds.max(t2_seconds))
}

/// Scale-out throughput law mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMode {
    /// The linearity factor applies once.
    Linear,
    /// Linearity decays with system size: `w_s^m`.
    Decaying,
}

impl ScaleMode {
    pub fn name(self) -> &'static str {
        match self {
            ScaleMode::Linear => "linear",
            ScaleMode::Decaying => "decaying",
        }
    }

    pub fn parse(s: &str) -> Option<ScaleMode> {
        match s {
            "linear" => Some(ScaleMode::Linear),
            "decaying" => Some(ScaleMode::Decaying),
            _ => None,
        }
    }
}

/// Effective linearity when scaling from `m` to `m+1` nodes.
pub fn effective_linearity(linearity: f64, nodes: u32, mode: ScaleMode) -> f64 {
    match mode {
        ScaleMode::Linear => linearity,
        ScaleMode::Decaying => libm::pow(linearity, nodes as f64),
    }
}

/// Inputs to the analytic scalability model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalabilityInputs {
    /// Stable-phase rate `R = n_0 / t_0`, points per second.
    pub base_rate: f64,
    /// Node count before scale-out, `m >= 1`.
    pub nodes: u32,
    /// Linearity factor `w_s` in (0, 1].
    pub linearity: f64,
    pub mode: ScaleMode,
    /// Stable-phase duration `t_0`, seconds.
    pub stable_secs: f64,
    /// Scale-out-phase duration `t_s`, seconds.
    pub scaleout_secs: f64,
}

impl ScalabilityInputs {
    pub fn validate(&self) -> Result<()> {
        if self.nodes < 1 {
            return Err(Error::InvalidParam {
                field: "nodes".into(),
                reason: "need at least one node".into(),
            });
        }
        if !(self.linearity > 0.0 && self.linearity <= 1.0) {
            return Err(Error::InvalidParam {
                field: "linearity".into(),
                reason: format!("must be in (0, 1], got {}", self.linearity),
            });
        }
        if !positive(self.base_rate) || !positive(self.stable_secs) || !positive(self.scaleout_secs)
        {
            return Err(Error::InvalidParam {
                field: "base_rate".into(),
                reason: "rate and phase durations must be positive".into(),
            });
        }
        Ok(())
    }

    /// Rate sustained after scaling from `m` to `m+1` nodes.
    pub fn post_scale_rate(&self) -> f64 {
        let m = self.nodes as f64;
        self.base_rate * ((m + 1.0) / m) * effective_linearity(self.linearity, self.nodes, self.mode)
    }
}

/// Throughput of a modeled run: ingest at `R` for `t_0`, then at the
/// post-scale rate for `t_s`, divided by the total duration.
pub fn model_iotps(inputs: &ScalabilityInputs) -> f64 {
    let n0 = inputs.base_rate * inputs.stable_secs;
    let ns = inputs.post_scale_rate() * inputs.scaleout_secs;
    (n0 + ns) / (inputs.stable_secs + inputs.scaleout_secs)
}

/// Yearly storage cost at `iotps` sustained ingestion and compression `r`:
/// `w_i * 1800 * IoTps * per_record / r`. `w_i * 1800` is one year of
/// seconds, so this prices a year of uncompressed records, shrunk by the
/// compression ratio.
pub fn storage_cost(cost: &CostModel, iotps: f64, ratio: f64) -> f64 {
    INTERVAL_WEIGHT * INTERVAL_SECONDS * iotps * cost.per_record_effective() / ratio
}

/// Price/performance in dollars per kIoTps: `(C_S + storage) / (IoTps/1000)`.
pub fn price_performance(cost: &CostModel, iotps: f64, ratio: f64) -> Result<f64> {
    if !positive(iotps) {
        return Err(Error::InvalidRun { reason: format!("IoTps must be positive, got {iotps}") });
    }
    if !positive(ratio) {
        return Err(Error::InvalidRun { reason: format!("ratio must be positive, got {ratio}") });
    }
    let total = cost.system_cost() + storage_cost(cost, iotps, ratio);
    Ok(total / (iotps / 1000.0))
}
