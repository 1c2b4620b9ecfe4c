//! A synthetic SUT whose admission rate follows a configurable scalability
//! law. Used to self-test the harness: phase scheduling, the throughput
//! metric and the scale-out machinery can be checked against closed-form
//! expectations.
//!
//! Inserts pass through a virtual-clock shaper: each batch occupies
//! `points / rate` seconds of virtual time and the call returns once the
//! wall clock catches up, so the measured admission rate tracks the law.
//! Idle time earns at most a small bounded credit, so scheduler jitter does
//! not erode the rate while long gaps still cannot bank a burst.
//! `scale_out` multiplies the rate by `(m+1)/m * w_eff` per the law.
//! Nothing is stored; queries return empty row sets and `disk_usage`
//! divides accepted bytes by the configured synthetic compression ratio.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use tsbench_core::metrics::{effective_linearity, ScaleMode};
use tsbench_core::query::Row;
use tsbench_core::workload::query::QuerySpec;
use tsbench_core::DataPoint;

use super::{Descriptor, InsertAck, ScaleOutOutcome, SutAdapter, SutError};

/// Largest idle credit the shaper may bank, in seconds.
const BURST_CREDIT_SECONDS: f64 = 0.05;

#[derive(Debug, Clone, Copy)]
pub struct ModeledConfig {
    pub initial_nodes: u32,
    /// Admission rate at the initial node count, points/second.
    pub base_rate: f64,
    /// Linearity factor `w_s` in (0, 1].
    pub linearity: f64,
    pub mode: ScaleMode,
    /// Synthetic `S_i / S_d`.
    pub compression_ratio: f64,
}

struct ModeledState {
    nodes: u32,
    rate: f64,
    virtual_seconds: f64,
    points: u64,
    bytes: u64,
    epoch: Instant,
}

pub struct ModeledSut {
    cfg: ModeledConfig,
    state: Mutex<ModeledState>,
}

impl ModeledSut {
    pub fn new(cfg: ModeledConfig) -> Self {
        ModeledSut {
            state: Mutex::new(ModeledState {
                nodes: cfg.initial_nodes,
                rate: cfg.base_rate,
                virtual_seconds: 0.0,
                points: 0,
                bytes: 0,
                epoch: Instant::now(),
            }),
            cfg,
        }
    }

    /// The rate the law prescribes after the next scale-out.
    pub fn next_rate(&self) -> f64 {
        let state = self.state.lock().unwrap();
        let m = state.nodes as f64;
        state.rate * ((m + 1.0) / m) * effective_linearity(self.cfg.linearity, state.nodes, self.cfg.mode)
    }

    pub fn accepted_points(&self) -> u64 {
        self.state.lock().unwrap().points
    }
}

impl SutAdapter for ModeledSut {
    fn descriptor(&self) -> Descriptor {
        Descriptor {
            name: "modeled".into(),
            nodes: self.state.lock().unwrap().nodes,
            scalable: true,
            verifiable: false,
        }
    }

    fn insert(&self, batch: &[DataPoint]) -> Result<InsertAck, SutError> {
        let n = batch.len() as u64;
        let bytes: u64 = batch.iter().map(|p| p.encoded_size()).sum();
        let (epoch, target) = {
            let mut state = self.state.lock().unwrap();
            let elapsed = state.epoch.elapsed().as_secs_f64();
            state.virtual_seconds = state.virtual_seconds.max(elapsed - BURST_CREDIT_SECONDS);
            state.virtual_seconds += n as f64 / state.rate;
            state.points += n;
            state.bytes += bytes;
            (state.epoch, state.virtual_seconds)
        };
        let deadline = epoch + Duration::from_secs_f64(target);
        let now = Instant::now();
        if let Some(wait) = deadline.checked_duration_since(now) {
            std::thread::sleep(wait);
        }
        Ok(InsertAck { points: n, bytes })
    }

    fn query(&self, spec: &QuerySpec) -> Result<Vec<Row>, SutError> {
        spec.validate()?;
        Ok(Vec::new())
    }

    fn scale_out(&self) -> Result<ScaleOutOutcome, SutError> {
        let mut state = self.state.lock().unwrap();
        let m = state.nodes as f64;
        state.rate *=
            ((m + 1.0) / m) * effective_linearity(self.cfg.linearity, state.nodes, self.cfg.mode);
        state.nodes += 1;
        let nodes = state.nodes;
        drop(state);
        Ok(ScaleOutOutcome::ScaledTo(Descriptor {
            name: "modeled".into(),
            nodes,
            scalable: true,
            verifiable: false,
        }))
    }

    fn disk_usage(&self) -> Result<u64, SutError> {
        let state = self.state.lock().unwrap();
        Ok((state.bytes as f64 / self.cfg.compression_ratio).ceil() as u64)
    }

    fn flush(&self) -> Result<(), SutError> {
        Ok(())
    }

    fn cleanup(&self) -> Result<(), SutError> {
        let mut state = self.state.lock().unwrap();
        state.nodes = self.cfg.initial_nodes;
        state.rate = self.cfg.base_rate;
        state.virtual_seconds = 0.0;
        state.points = 0;
        state.bytes = 0;
        state.epoch = Instant::now();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use tsbench_core::Value;

    fn mk(nodes: u32, rate: f64, linearity: f64, mode: ScaleMode) -> ModeledSut {
        ModeledSut::new(ModeledConfig {
            initial_nodes: nodes,
            base_rate: rate,
            linearity,
            mode,
            compression_ratio: 10.0,
        })
    }

    fn batch(n: usize) -> Vec<DataPoint> {
        (0..n).map(|i| DataPoint::new(Arc::from("s"), i as i64, Value::Float(0.0))).collect()
    }

    #[test]
    fn post_scale_rates_follow_the_law() {
        // m=4, w=1, linear: rate * 1.25.
        let sut = mk(4, 1000.0, 1.0, ScaleMode::Linear);
        assert!((sut.next_rate() - 1250.0).abs() < 1e-9);
        sut.scale_out().unwrap();
        assert_eq!(sut.descriptor().nodes, 5);

        // m=4, w=0.9, decaying: rate * 1.25 * 0.9^4 = 0.8201... * rate.
        let sut = mk(4, 1000.0, 0.9, ScaleMode::Decaying);
        let expect = 1000.0 * 1.25 * 0.9f64.powi(4);
        assert!((sut.next_rate() - expect).abs() < 1e-9, "{}", sut.next_rate());
    }

    #[test]
    fn insertion_is_paced_to_the_rate() {
        let sut = mk(1, 20_000.0, 1.0, ScaleMode::Linear);
        let start = Instant::now();
        let mut accepted = 0u64;
        while start.elapsed().as_secs_f64() < 1.0 {
            accepted += sut.insert(&batch(100)).unwrap().points;
        }
        let rate = accepted as f64 / start.elapsed().as_secs_f64();
        assert!((rate - 20_000.0).abs() / 20_000.0 < 0.05, "measured {rate}");
    }

    #[test]
    fn synthetic_disk_usage_divides_bytes() {
        let sut = mk(1, 1e9, 1.0, ScaleMode::Linear);
        sut.insert(&batch(1000)).unwrap(); // 8000 value bytes
        assert_eq!(sut.disk_usage().unwrap(), 800);
    }

    #[test]
    fn cleanup_resets_the_law() {
        let sut = mk(2, 5000.0, 0.9, ScaleMode::Linear);
        sut.insert(&batch(10)).unwrap();
        sut.scale_out().unwrap();
        sut.cleanup().unwrap();
        assert_eq!(sut.descriptor().nodes, 2);
        assert_eq!(sut.accepted_points(), 0);
        assert!((sut.next_rate() - 5000.0 * 1.5 * 0.9).abs() < 1e-9);
    }
}
