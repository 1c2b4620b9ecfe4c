//! Analytic curve sweeps: plot-ready CSVs for the scalability model and the
//! cost / price-performance curves.
//!
//! Output columns:
//! - scalability: `m,w_s,mode,iotps_kiotps`
//! - cost: `r,storage_cost,total_cost`
//! - price/performance: `r,usd_per_kiotps`
//!
//! Sweeps are pure closed-form evaluations; for identical parameters the
//! emitted CSV bytes are identical across reruns.

use std::fmt::Write as _;

use tsbench_core::metrics::{
    model_iotps, price_performance, storage_cost, CostModel, ScalabilityInputs, ScaleMode,
};

/// One scalability curve: a linearity factor with its law mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Series {
    pub linearity: f64,
    pub mode: ScaleMode,
}

impl Series {
    /// Parse `"0.9:decaying"` / `"1.0:linear"`.
    pub fn parse(text: &str) -> Result<Series, String> {
        let (w, mode) = text
            .split_once(':')
            .ok_or_else(|| format!("expected `<w_s>:<linear|decaying>`, got `{text}`"))?;
        let linearity: f64 = w.trim().parse().map_err(|e| format!("bad w_s `{w}`: {e}"))?;
        if !(linearity > 0.0 && linearity <= 1.0) {
            return Err(format!("w_s must be in (0, 1], got {linearity}"));
        }
        let mode = ScaleMode::parse(mode.trim()).ok_or_else(|| format!("bad mode `{mode}`"))?;
        Ok(Series { linearity, mode })
    }
}

#[derive(Debug, Clone)]
pub struct ScalabilitySweep {
    /// Baseline stable-phase throughput in kIoTps.
    pub base_kiotps: f64,
    /// Evaluate node counts `1..=m_max`.
    pub m_max: u32,
    pub series: Vec<Series>,
}

impl Default for ScalabilitySweep {
    fn default() -> Self {
        // The published curves: ideal linear scaling vs w_s = 0.9 decaying
        // with system size.
        ScalabilitySweep {
            base_kiotps: 4_100.0,
            m_max: 10,
            series: vec![
                Series { linearity: 1.0, mode: ScaleMode::Linear },
                Series { linearity: 0.9, mode: ScaleMode::Decaying },
            ],
        }
    }
}

/// Evaluate the scalability model over the grid with `t_0 = t_s`.
pub fn scalability_csv(sweep: &ScalabilitySweep) -> String {
    let mut out = String::from("m,w_s,mode,iotps_kiotps\n");
    for series in &sweep.series {
        for m in 1..=sweep.m_max {
            let v = model_iotps(&ScalabilityInputs {
                base_rate: sweep.base_kiotps,
                nodes: m,
                linearity: series.linearity,
                mode: series.mode,
                stable_secs: 1.0,
                scaleout_secs: 1.0,
            });
            let _ = writeln!(out, "{m},{},{},{v}", series.linearity, series.mode.name());
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct CostSweep {
    /// Sustained throughput in kIoTps.
    pub kiotps: f64,
    pub ratios: Vec<f64>,
    pub cost: CostModel,
}

impl Default for CostSweep {
    fn default() -> Self {
        CostSweep {
            kiotps: 4_100.0,
            ratios: vec![1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
            cost: CostModel::default(),
        }
    }
}

/// Storage vs total system cost under varied compression ratios.
pub fn cost_csv(sweep: &CostSweep) -> String {
    let mut out = String::from("r,storage_cost,total_cost\n");
    let iotps = sweep.kiotps * 1000.0;
    for r in &sweep.ratios {
        let storage = storage_cost(&sweep.cost, iotps, *r);
        let total = storage + sweep.cost.system_cost();
        let _ = writeln!(out, "{r},{storage},{total}");
    }
    out
}

/// Price/performance under varied compression ratios.
pub fn price_csv(sweep: &CostSweep) -> Result<String, tsbench_core::Error> {
    let mut out = String::from("r,usd_per_kiotps\n");
    let iotps = sweep.kiotps * 1000.0;
    for r in &sweep.ratios {
        let usd = price_performance(&sweep.cost, iotps, *r)?;
        let _ = writeln!(out, "{r},{usd}");
    }
    Ok(out)
}
