//! Workload synthesis: sensor space, per-client op streams, record
//! allocation.
//!
//! Each worker thread owns a [`ClientWorkload`] and never shares generator
//! state; the only cross-thread piece is the [`ObservedWindow`], a pair of
//! monotonically advancing atomics that query generation reads
//! opportunistically.

mod alloc_records;
pub mod query;

pub use alloc_records::{allocate_records, Allocation};

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicI64, Ordering};

use crate::datagen::model::{GeneratorModel, ModelSynth};
use crate::datagen::replay::{ReplayCursor, SampleSet};
use crate::datagen::{
    make_generator, DistributionSpec, SpacingSpec, SpacingState, StringGen, ValueGen,
};
use crate::error::Result;
use crate::point::{DataPoint, Timestamp, ValueKind};
use crate::rng::{stream_seed, StreamKind, Xoshiro256};
use query::{gen_query, QueryGenConfig, QuerySpec, QueryTemplate};

/// How sensor value kinds are assigned.
#[derive(Debug, Clone, PartialEq)]
pub enum KindPolicy {
    Fixed(ValueKind),
    /// 60% float, 30% integer, 10% string, drawn per sensor from the seed.
    Mixed,
}

/// Static generation profile shared by all sensors.
#[derive(Debug, Clone)]
pub struct SensorProfile {
    pub kinds: KindPolicy,
    /// Value distribution for float sensors.
    pub float_dist: DistributionSpec,
    /// Value distribution for integer sensors.
    pub int_dist: DistributionSpec,
    /// Length distribution for string sensors.
    pub strlen_dist: DistributionSpec,
    pub max_string_len: u32,
    pub spacing: SpacingSpec,
}

impl SensorProfile {
    pub fn default_float() -> Self {
        SensorProfile {
            kinds: KindPolicy::Fixed(ValueKind::Float),
            float_dist: DistributionSpec::exponential(1.0),
            int_dist: DistributionSpec::poisson(10.0),
            strlen_dist: DistributionSpec::uniform(8.0, 64.0),
            max_string_len: crate::datagen::DEFAULT_MAX_STRING_LEN,
            spacing: SpacingSpec::Even { interval_ms: 1_000 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.float_dist.validate()?;
        self.int_dist.validate()?;
        self.strlen_dist.validate()?;
        self.spacing.validate()
    }
}

/// One simulated sensor.
#[derive(Debug, Clone)]
pub struct SensorSpec {
    pub id: Arc<str>,
    pub kind: ValueKind,
    pub spacing: SpacingSpec,
    /// Heuristic value bounds used to draw realistic filter constants.
    pub value_range: (f64, f64),
}

/// The `m_s` simulated sensors with deterministic ids and assignments.
#[derive(Debug, Clone)]
pub struct SensorSpace {
    sensors: Vec<SensorSpec>,
    profile: SensorProfile,
}

impl SensorSpace {
    pub fn build(m_s: u32, profile: &SensorProfile, seed: u64) -> Result<Self> {
        if m_s == 0 {
            return Err(crate::error::Error::InvalidParam {
                field: "sensors".into(),
                reason: "need at least one sensor".into(),
            });
        }
        profile.validate()?;
        let mut assign = Xoshiro256::from_seed(stream_seed(seed, StreamKind::Assignment, 0));
        let mut sensors = Vec::with_capacity(m_s as usize);
        for i in 0..m_s {
            let kind = match profile.kinds {
                KindPolicy::Fixed(kind) => kind,
                KindPolicy::Mixed => {
                    let draw = assign.below(10);
                    if draw < 6 {
                        ValueKind::Float
                    } else if draw < 9 {
                        ValueKind::Integer
                    } else {
                        ValueKind::Text
                    }
                }
            };
            let dist = match kind {
                ValueKind::Float => &profile.float_dist,
                ValueKind::Integer => &profile.int_dist,
                ValueKind::Text => &profile.strlen_dist,
            };
            sensors.push(SensorSpec {
                id: Arc::from(format!("sensor_{i}").as_str()),
                kind,
                spacing: profile.spacing.clone(),
                value_range: range_hint(dist),
            });
        }
        Ok(SensorSpace { sensors, profile: profile.clone() })
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    pub fn get(&self, idx: usize) -> &SensorSpec {
        &self.sensors[idx]
    }

    pub fn by_id(&self, id: &str) -> Option<&SensorSpec> {
        self.sensors.iter().find(|s| s.id.as_ref() == id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SensorSpec> {
        self.sensors.iter()
    }

    pub fn profile(&self) -> &SensorProfile {
        &self.profile
    }
}

/// Rough support bounds per distribution, for filter-constant draws.
fn range_hint(dist: &DistributionSpec) -> (f64, f64) {
    let get = |name: &str, default: f64| dist.params.get(name).copied().unwrap_or(default);
    match dist.kind {
        crate::datagen::DistKind::Constant => {
            let v = get("value", 0.0);
            (v, v)
        }
        crate::datagen::DistKind::Uniform => (get("lo", 0.0), get("hi", 1.0)),
        crate::datagen::DistKind::Exponential => (0.0, 8.0 / get("rate", 1.0)),
        crate::datagen::DistKind::Pareto => {
            let scale = get("scale", 1.0);
            (scale, scale * 10.0)
        }
        crate::datagen::DistKind::Poisson => {
            let lambda = get("lambda", 10.0);
            (0.0, lambda + 8.0 * libm::sqrt(lambda))
        }
        crate::datagen::DistKind::Zipfian => (1.0, get("n", 1000.0)),
        crate::datagen::DistKind::Histogram => {
            let buckets = dist.params.len().max(1) as f64;
            (0.0, buckets - 1.0)
        }
    }
}

/// Monotonically advancing bounds of the data actually ingested so far.
/// Updated with release stores after acknowledged writes; readers may see a
/// slightly stale window, which is fine for query synthesis.
#[derive(Debug)]
pub struct ObservedWindow {
    lo: AtomicI64,
    hi: AtomicI64,
}

impl Default for ObservedWindow {
    fn default() -> Self {
        ObservedWindow { lo: AtomicI64::new(i64::MAX), hi: AtomicI64::new(i64::MIN) }
    }
}

impl ObservedWindow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, first_ts: Timestamp, last_ts: Timestamp) {
        self.lo.fetch_min(first_ts, Ordering::Release);
        self.hi.fetch_max(last_ts, Ordering::Release);
    }

    /// `None` until the first write lands.
    pub fn span(&self) -> Option<(Timestamp, Timestamp)> {
        let lo = self.lo.load(Ordering::Acquire);
        let hi = self.hi.load(Ordering::Acquire);
        if hi < lo {
            None
        } else {
            Some((lo, hi))
        }
    }
}

/// One workload operation, tagged with its issuing client.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadOp {
    pub client: u32,
    pub kind: OpKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OpKind {
    /// A per-sensor timestamp-ordered batch.
    Write(Vec<DataPoint>),
    Query(QuerySpec),
}

/// Per-client data source.
enum ClientSource {
    /// Parametric generation: one independent stream per owned sensor.
    Sensors(Vec<SyntheticSensor>),
    /// Periodic replay of the bound sample set.
    Replay { sample: Arc<SampleSet>, cursor: ReplayCursor },
    /// Synthesis from the fitted model.
    Model { model: Arc<GeneratorModel>, synth: ModelSynth },
}

struct SyntheticSensor {
    id: Arc<str>,
    spacing: SpacingState,
    values: ValueGen,
}

/// Knobs for the op mix.
#[derive(Debug, Clone)]
pub struct WorkloadParams {
    pub batch_size: u32,
    /// Probability that an op is a query, in [0, 1).
    pub query_fraction: f64,
    /// Relative weights of the four templates.
    pub template_weights: [u32; 4],
    pub query_cfg: QueryGenConfig,
    pub start_timestamp_ms: Timestamp,
}

impl Default for WorkloadParams {
    fn default() -> Self {
        WorkloadParams {
            batch_size: 100,
            query_fraction: 0.05,
            template_weights: [1, 1, 1, 1],
            query_cfg: QueryGenConfig::default(),
            start_timestamp_ms: 1_700_000_000_000,
        }
    }
}

/// The data-generation method driving a run.
pub enum MethodSource {
    Distribution,
    Replay(Arc<SampleSet>),
    Model(Arc<GeneratorModel>),
}

/// Thread state for one client: generator states, record budget and op mix.
pub struct ClientWorkload {
    client: u32,
    rng: Xoshiro256,
    budget: u64,
    params: WorkloadParams,
    space: Arc<SensorSpace>,
    source: ClientSource,
    /// Ids of the sensors this client owns (stamped onto replay/model data).
    own_sensors: Vec<Arc<str>>,
    rotate: usize,
}

impl ClientWorkload {
    /// Build the state for client `client` of `clients`. Sensors are
    /// partitioned round-robin, so per-sensor streams are single-writer.
    /// Per-sensor streams are seeded by sensor index, independent of the
    /// client layout.
    pub fn build(
        space: Arc<SensorSpace>,
        method: &MethodSource,
        params: WorkloadParams,
        seed: u64,
        client: u32,
        clients: u32,
        budget: u64,
    ) -> Result<Self> {
        let own: Vec<(usize, &SensorSpec)> = space
            .iter()
            .enumerate()
            .filter(|(i, _)| (*i as u32) % clients == client)
            .collect();
        if own.is_empty() {
            return Err(crate::error::Error::InvalidParam {
                field: "sensors".into(),
                reason: format!("client {client} owns no sensors; need at least {clients}"),
            });
        }
        let own_sensors: Vec<Arc<str>> = own.iter().map(|(_, s)| s.id.clone()).collect();

        let source = match method {
            MethodSource::Distribution => {
                let mut sensors = Vec::with_capacity(own.len());
                for (idx, spec) in &own {
                    let value_seed = stream_seed(seed, StreamKind::SensorValue, *idx as u64);
                    let spacing_seed = stream_seed(seed, StreamKind::SensorSpacing, *idx as u64);
                    let values = match spec.kind {
                        ValueKind::Float => ValueGen::Float(make_generator(
                            &space.profile().float_dist,
                            value_seed,
                        )?),
                        ValueKind::Integer => ValueGen::Integer(make_generator(
                            &space.profile().int_dist,
                            value_seed,
                        )?),
                        ValueKind::Text => ValueGen::Text(StringGen::new(
                            &space.profile().strlen_dist,
                            space.profile().max_string_len,
                            value_seed,
                        )?),
                    };
                    sensors.push(SyntheticSensor {
                        id: spec.id.clone(),
                        spacing: SpacingState::new(
                            &spec.spacing,
                            params.start_timestamp_ms,
                            spacing_seed,
                        )?,
                        values,
                    });
                }
                ClientSource::Sensors(sensors)
            }
            MethodSource::Replay(sample) => ClientSource::Replay {
                sample: sample.clone(),
                cursor: ReplayCursor::new(sample, client as usize, params.start_timestamp_ms),
            },
            MethodSource::Model(model) => {
                model.validate()?;
                ClientSource::Model {
                    model: model.clone(),
                    synth: ModelSynth::new(
                        params.start_timestamp_ms,
                        stream_seed(seed, StreamKind::ModelSynth, client as u64),
                    ),
                }
            }
        };

        Ok(ClientWorkload {
            client,
            rng: Xoshiro256::from_seed(stream_seed(seed, StreamKind::Client, client as u64)),
            budget,
            params,
            space,
            source,
            own_sensors,
            rotate: 0,
        })
    }

    pub fn client_id(&self) -> u32 {
        self.client
    }

    pub fn budget_remaining(&self) -> u64 {
        self.budget
    }

    /// Re-arm the record budget (measured run after warmup). Generator
    /// clocks keep advancing so timestamps never repeat within an iteration.
    pub fn reset_budget(&mut self, budget: u64) {
        self.budget = budget;
    }

    /// Next operation, or `None` once the record budget is exhausted.
    ///
    /// With probability `query_fraction` the op is a query over the observed
    /// window; before the first write lands (empty window) it falls back to
    /// a write. Queries do not consume the record budget.
    pub fn next_op(&mut self, window: &ObservedWindow) -> Option<WorkloadOp> {
        if self.budget == 0 {
            return None;
        }
        if self.params.query_fraction > 0.0
            && self.rng.next_f64() < self.params.query_fraction
        {
            if let Some(span) = window.span() {
                let template = self.pick_template();
                if let Ok(spec) =
                    gen_query(template, &mut self.rng, &self.space, span, &self.params.query_cfg)
                {
                    return Some(WorkloadOp { client: self.client, kind: OpKind::Query(spec) });
                }
            }
        }
        let n = (self.params.batch_size as u64).min(self.budget);
        let batch = self.next_batch(n as usize);
        self.budget -= n;
        Some(WorkloadOp { client: self.client, kind: OpKind::Write(batch) })
    }

    fn pick_template(&mut self) -> QueryTemplate {
        let total: u64 = self.params.template_weights.iter().map(|w| *w as u64).sum();
        if total == 0 {
            return QueryTemplate::TimeRange;
        }
        let mut draw = self.rng.below(total);
        for template in QueryTemplate::ALL {
            let w = self.params.template_weights[template.index()] as u64;
            if draw < w {
                return template;
            }
            draw -= w;
        }
        QueryTemplate::TimeRange
    }

    /// A write batch: all points belong to one (rotating) owned sensor and
    /// are timestamp-ordered.
    fn next_batch(&mut self, n: usize) -> Vec<DataPoint> {
        let sensor_idx = self.rotate % self.own_sensors.len();
        self.rotate = self.rotate.wrapping_add(1);
        let mut batch = Vec::with_capacity(n);
        match &mut self.source {
            ClientSource::Sensors(sensors) => {
                let s = &mut sensors[sensor_idx];
                for _ in 0..n {
                    let ts = s.spacing.next_timestamp();
                    batch.push(DataPoint::new(s.id.clone(), ts, s.values.next_value()));
                }
            }
            ClientSource::Replay { sample, cursor } => {
                let id = self.own_sensors[sensor_idx].clone();
                for _ in 0..n {
                    let (ts, value) = cursor.next(sample);
                    batch.push(DataPoint::new(id.clone(), ts, value));
                }
            }
            ClientSource::Model { model, synth } => {
                let id = self.own_sensors[sensor_idx].clone();
                for _ in 0..n {
                    let (ts, value) = synth.next(model);
                    batch.push(DataPoint::new(id.clone(), ts, value));
                }
            }
        }
        batch
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn client(q: f64, budget: u64, batch: u32) -> ClientWorkload {
        let space = Arc::new(SensorSpace::build(6, &SensorProfile::default_float(), 1).unwrap());
        let params = WorkloadParams {
            batch_size: batch,
            query_fraction: q,
            ..WorkloadParams::default()
        };
        ClientWorkload::build(space, &MethodSource::Distribution, params, 1, 0, 2, budget)
            .unwrap()
    }

    #[test]
    fn zero_query_fraction_yields_only_writes() {
        let window = ObservedWindow::new();
        window.record(0, 1_000_000);
        let mut wl = client(0.0, 10_000, 100);
        while let Some(op) = wl.next_op(&window) {
            assert!(matches!(op.kind, OpKind::Write(_)));
        }
    }

    #[test]
    fn budget_exhaustion_truncates_the_last_batch() {
        let window = ObservedWindow::new();
        let mut wl = client(0.0, 10, 4);
        let sizes: Vec<usize> = core::iter::from_fn(|| {
            wl.next_op(&window).map(|op| match op.kind {
                OpKind::Write(batch) => batch.len(),
                _ => unreachable!(),
            })
        })
        .collect();
        assert_eq!(sizes, [4, 4, 2]);
        assert!(wl.next_op(&window).is_none());
    }

    #[test]
    fn empty_window_falls_back_to_writes() {
        let window = ObservedWindow::new();
        let mut wl = client(0.99, 1_000, 10);
        for _ in 0..5 {
            let op = wl.next_op(&window).unwrap();
            assert!(matches!(op.kind, OpKind::Write(_)));
        }
    }

    #[test]
    fn query_count_matches_binomial_oracle() {
        // q = 0.05 over 1e6 ops: expect 50,000 queries within 3 sigma
        // (sigma = sqrt(n q (1-q)) ~= 218).
        let window = ObservedWindow::new();
        window.record(0, 10_000_000);
        let n_ops = 1_000_000u64;
        let mut wl = client(0.05, u64::MAX, 1);
        let mut queries = 0u64;
        for _ in 0..n_ops {
            match wl.next_op(&window).unwrap().kind {
                OpKind::Query(_) => queries += 1,
                OpKind::Write(_) => {}
            }
        }
        let expected = 50_000.0;
        let sigma = (n_ops as f64 * 0.05 * 0.95).sqrt();
        assert!(
            (queries as f64 - expected).abs() < 3.0 * sigma,
            "queries = {queries}, expected {expected} +- {:.0}",
            3.0 * sigma
        );
    }

    #[test]
    fn op_streams_are_deterministic() {
        let window = ObservedWindow::new();
        window.record(0, 500_000);
        let mut a = client(0.2, 5_000, 50);
        let mut b = client(0.2, 5_000, 50);
        loop {
            match (a.next_op(&window), b.next_op(&window)) {
                (None, None) => break,
                (x, y) => assert_eq!(x, y),
            }
        }
    }

    #[test]
    fn batches_are_per_sensor_and_ordered() {
        let window = ObservedWindow::new();
        let mut wl = client(0.0, 2_000, 100);
        while let Some(op) = wl.next_op(&window) {
            if let OpKind::Write(batch) = op.kind {
                let sensor = batch[0].sensor.clone();
                let mut prev = i64::MIN;
                for p in &batch {
                    assert_eq!(p.sensor, sensor);
                    assert!(p.timestamp_ms > prev);
                    prev = p.timestamp_ms;
                }
            }
        }
    }

    #[test]
    fn sensor_partition_is_disjoint_round_robin() {
        let space = Arc::new(SensorSpace::build(7, &SensorProfile::default_float(), 1).unwrap());
        let mk = |c| {
            ClientWorkload::build(
                space.clone(),
                &MethodSource::Distribution,
                WorkloadParams::default(),
                1,
                c,
                3,
                100,
            )
            .unwrap()
        };
        let all: Vec<Arc<str>> =
            (0..3).flat_map(|c| mk(c).own_sensors.clone().into_iter()).collect();
        assert_eq!(all.len(), 7);
        let mut unique = all.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), 7);
    }
}
