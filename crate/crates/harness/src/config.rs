//! Run configuration: a flat `key=value` properties file plus flag
//! overrides.
//!
//! Lines are `key = value`, UTF-8; blank lines and lines starting with `#`
//! are ignored. Unknown keys are rejected. `records` is the one required
//! key; everything else has a documented default. Overrides (from CLI flags)
//! are applied after the file, last one wins.
//!
//! The full key table lives in the README; `RunConfig::echo` emits every key
//! back out in sorted order, which is also the canonical config emission
//! used in reports.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use tsbench_core::datagen::{DistKind, DistributionSpec, SpacingSpec, DEFAULT_MAX_STRING_LEN};
use tsbench_core::metrics::{CostModel, ScaleMode};
use tsbench_core::workload::query::{AggFn, QueryGenConfig};
use tsbench_core::workload::{KindPolicy, SensorProfile, WorkloadParams};
use tsbench_core::ValueKind;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: expected `key=value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}`: {reason}")]
    BadValue { line: usize, key: String, reason: String },
    #[error("missing required key `{key}`")]
    MissingKey { key: &'static str },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Data generation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenMethod {
    Distribution,
    Replay,
    Model,
}

impl GenMethod {
    pub fn name(self) -> &'static str {
        match self {
            GenMethod::Distribution => "distribution",
            GenMethod::Replay => "replay",
            GenMethod::Model => "model",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKindPolicy {
    Float,
    Integer,
    Text,
    Mixed,
}

impl ValueKindPolicy {
    fn name(self) -> &'static str {
        match self {
            ValueKindPolicy::Float => "float",
            ValueKindPolicy::Integer => "integer",
            ValueKindPolicy::Text => "string",
            ValueKindPolicy::Mixed => "mixed",
        }
    }

    pub fn to_kind_policy(self) -> KindPolicy {
        match self {
            ValueKindPolicy::Float => KindPolicy::Fixed(ValueKind::Float),
            ValueKindPolicy::Integer => KindPolicy::Fixed(ValueKind::Integer),
            ValueKindPolicy::Text => KindPolicy::Fixed(ValueKind::Text),
            ValueKindPolicy::Mixed => KindPolicy::Mixed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatagenConfig {
    pub method: GenMethod,
    pub value_kind: ValueKindPolicy,
    /// Value distribution for float sensors (`datagen.dist*` keys).
    pub float_dist: DistributionSpec,
    /// Poisson rate for integer sensors.
    pub int_lambda: f64,
    /// Length distribution for string sensors (`datagen.strlen*` keys).
    pub strlen_dist: DistributionSpec,
    pub max_string_len: u32,
    pub sample_file: Option<PathBuf>,
    pub replay_set_count: u32,
    /// Unset: the scale profile's default (6,710,886 full scale, 10,000
    /// desk scale). 0: derive the largest size that fits the loaded sample.
    pub replay_points_per_set: Option<u64>,
    pub spacing_even: bool,
    pub spacing_interval_ms: u32,
    pub spacing_dist: DistributionSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SutConfig {
    pub adapter: String,
    /// Defaults to `<out>/sut-data` when unset.
    pub data_dir: Option<PathBuf>,
    pub nodes: u32,
    pub scalable: bool,
    pub segment_points: u32,
    /// `true` stores segments with the `none` codec (raw baseline).
    pub raw_codec: bool,
    pub modeled_rate: f64,
    pub modeled_linearity: f64,
    pub modeled_mode: ScaleMode,
    pub modeled_compression_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sensors: u32,
    pub clients: u32,
    pub instances: u32,
    pub records: u64,
    pub seed: u64,
    pub desk_scale: bool,
    /// Wall-clock cap on the warmup run; 0 means uncapped (the warmup runs
    /// its full record budget).
    pub warmup_cap_seconds: f64,
    pub min_run_seconds: f64,
    pub min_per_sensor_rate: f64,
    /// Per-client write pacing in points/second; 0 means open loop.
    pub client_rate: f64,
    pub query_fraction: f64,
    pub batch_size: u32,
    pub template_weights: [u32; 4],
    pub query_sensors_min: u32,
    pub query_sensors_max: u32,
    pub start_timestamp_ms: i64,
    pub progress_interval_seconds: f64,
    pub scheduler_tick_ms: u64,
    pub downsample_agg: AggFn,
    pub datagen: DatagenConfig,
    pub sut: SutConfig,
    pub cost: CostModel,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sensors: 100,
            clients: 3,
            instances: 1,
            records: 0, // required key; enforced by the parser
            seed: 42,
            desk_scale: false,
            warmup_cap_seconds: 1_800.0,
            min_run_seconds: 1_800.0,
            min_per_sensor_rate: 20.0,
            client_rate: 0.0,
            query_fraction: 0.05,
            batch_size: 100,
            template_weights: [1, 1, 1, 1],
            query_sensors_min: 1,
            query_sensors_max: 4,
            start_timestamp_ms: 1_700_000_000_000,
            progress_interval_seconds: 5.0,
            scheduler_tick_ms: 100,
            downsample_agg: AggFn::Avg,
            datagen: DatagenConfig {
                method: GenMethod::Distribution,
                value_kind: ValueKindPolicy::Float,
                float_dist: DistributionSpec::exponential(1.0),
                int_lambda: 10.0,
                strlen_dist: DistributionSpec::uniform(8.0, 64.0),
                max_string_len: DEFAULT_MAX_STRING_LEN,
                sample_file: None,
                replay_set_count: 10,
                replay_points_per_set: None,
                spacing_even: true,
                spacing_interval_ms: 1_000,
                spacing_dist: DistributionSpec::exponential(0.01),
            },
            sut: SutConfig {
                adapter: "reference".into(),
                data_dir: None,
                nodes: 1,
                scalable: true,
                segment_points: 4_096,
                raw_codec: false,
                modeled_rate: 100_000.0,
                modeled_linearity: 1.0,
                modeled_mode: ScaleMode::Linear,
                modeled_compression_ratio: 10.0,
            },
            cost: CostModel::default(),
        }
    }
}

/// Parse a config file and apply flag overrides (`key=value` strings).
pub fn parse_config(path: &Path, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config_str(&text, overrides)
}

pub fn parse_config_str(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut saw_records = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line, text: trimmed.to_string() })?;
        apply_key(&mut cfg, key.trim(), value.trim(), line, &mut saw_records)?;
    }
    for (i, entry) in overrides.iter().enumerate() {
        // Override "lines" are numbered after the file for error messages.
        let line = usize::MAX - overrides.len() + i;
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: 0, text: entry.clone() })?;
        apply_key(&mut cfg, key.trim(), value.trim(), line, &mut saw_records)?;
    }

    if !saw_records {
        return Err(ConfigError::MissingKey { key: "records" });
    }
    cfg.validate().map_err(ConfigError::Invalid)?;
    Ok(cfg)
}

fn bad(line: usize, key: &str, reason: impl fmt::Display) -> ConfigError {
    ConfigError::BadValue { line, key: key.to_string(), reason: reason.to_string() }
}

fn apply_key(
    cfg: &mut RunConfig,
    key: &str,
    value: &str,
    line: usize,
    saw_records: &mut bool,
) -> Result<(), ConfigError> {
    macro_rules! num {
        ($ty:ty) => {
            value.parse::<$ty>().map_err(|e| bad(line, key, e))?
        };
    }
    match key {
        "sensors" => cfg.sensors = num!(u32),
        "clients" => cfg.clients = num!(u32),
        "instances" => cfg.instances = num!(u32),
        "records" => {
            cfg.records = num!(u64);
            *saw_records = true;
        }
        "seed" => cfg.seed = num!(u64),
        "desk_scale" => cfg.desk_scale = parse_bool(value).ok_or_else(|| bad(line, key, "expected true/false"))?,
        "warmup_seconds" => cfg.warmup_cap_seconds = num!(f64),
        "min_run_seconds" => cfg.min_run_seconds = num!(f64),
        "min_per_sensor_rate" => cfg.min_per_sensor_rate = num!(f64),
        "client_rate" => cfg.client_rate = num!(f64),
        "query_fraction" => cfg.query_fraction = num!(f64),
        "batch_size" => cfg.batch_size = num!(u32),
        "template_weights" => {
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            if parts.len() != 4 {
                return Err(bad(line, key, "expected 4 comma-separated weights"));
            }
            for (i, p) in parts.iter().enumerate() {
                cfg.template_weights[i] = p.parse().map_err(|e| bad(line, key, e))?;
            }
        }
        "query_sensors_min" => cfg.query_sensors_min = num!(u32),
        "query_sensors_max" => cfg.query_sensors_max = num!(u32),
        "start_timestamp_ms" => cfg.start_timestamp_ms = num!(i64),
        "progress_interval_seconds" => cfg.progress_interval_seconds = num!(f64),
        "scheduler_tick_ms" => cfg.scheduler_tick_ms = num!(u64),
        "downsample_agg" => {
            cfg.downsample_agg =
                AggFn::parse(value).ok_or_else(|| bad(line, key, "unknown aggregate"))?
        }
        "datagen.method" => {
            cfg.datagen.method = match value {
                "distribution" => GenMethod::Distribution,
                "replay" => GenMethod::Replay,
                "model" => GenMethod::Model,
                _ => return Err(bad(line, key, "expected distribution|replay|model")),
            }
        }
        "datagen.value_kind" => {
            cfg.datagen.value_kind = match value {
                "float" => ValueKindPolicy::Float,
                "integer" => ValueKindPolicy::Integer,
                "string" => ValueKindPolicy::Text,
                "mixed" => ValueKindPolicy::Mixed,
                _ => return Err(bad(line, key, "expected float|integer|string|mixed")),
            }
        }
        "datagen.dist" => {
            let kind =
                DistKind::parse(value).ok_or_else(|| bad(line, key, "unknown distribution"))?;
            cfg.datagen.float_dist = DistributionSpec::new(kind);
        }
        "datagen.lambda" => cfg.datagen.int_lambda = num!(f64),
        "datagen.strlen" => {
            let kind =
                DistKind::parse(value).ok_or_else(|| bad(line, key, "unknown distribution"))?;
            cfg.datagen.strlen_dist = DistributionSpec::new(kind);
        }
        "datagen.max_string_len" => cfg.datagen.max_string_len = num!(u32),
        "datagen.sample_file" => cfg.datagen.sample_file = Some(PathBuf::from(value)),
        "replay.set_count" => cfg.datagen.replay_set_count = num!(u32),
        "replay.points_per_set" => cfg.datagen.replay_points_per_set = Some(num!(u64)),
        "spacing.mode" => {
            cfg.datagen.spacing_even = match value {
                "even" => true,
                "uneven" => false,
                _ => return Err(bad(line, key, "expected even|uneven")),
            }
        }
        "spacing.interval_ms" => cfg.datagen.spacing_interval_ms = num!(u32),
        "spacing.dist" => {
            let kind =
                DistKind::parse(value).ok_or_else(|| bad(line, key, "unknown distribution"))?;
            cfg.datagen.spacing_dist = DistributionSpec::new(kind);
        }
        "sut.adapter" => cfg.sut.adapter = value.to_string(),
        "sut.data_dir" => cfg.sut.data_dir = Some(PathBuf::from(value)),
        "sut.nodes" => cfg.sut.nodes = num!(u32),
        "sut.scalable" => cfg.sut.scalable = parse_bool(value).ok_or_else(|| bad(line, key, "expected true/false"))?,
        "sut.segment_points" => cfg.sut.segment_points = num!(u32),
        "sut.codec" => {
            cfg.sut.raw_codec = match value {
                "auto" => false,
                "none" => true,
                _ => return Err(bad(line, key, "expected auto|none")),
            }
        }
        "modeled.rate" => cfg.sut.modeled_rate = num!(f64),
        "modeled.linearity" => cfg.sut.modeled_linearity = num!(f64),
        "modeled.mode" => {
            cfg.sut.modeled_mode =
                ScaleMode::parse(value).ok_or_else(|| bad(line, key, "expected linear|decaying"))?
        }
        "modeled.compression_ratio" => cfg.sut.modeled_compression_ratio = num!(f64),
        "cost.storage_component_usd" => cfg.cost.storage_component_usd = num!(f64),
        "cost.storage_capacity_bytes" => cfg.cost.storage_capacity_bytes = num!(f64),
        "cost.before_usd" => cfg.cost.system_cost_before_usd = num!(f64),
        "cost.after_usd" => cfg.cost.system_cost_after_usd = num!(f64),
        "cost.per_record_usd" => cfg.cost.per_record_storage_usd = num!(f64),
        "cost.record_bytes" => cfg.cost.record_bytes = num!(f64),
        _ => {
            // Distribution parameter namespaces.
            if let Some(param) = key.strip_prefix("datagen.dist.") {
                let v = value.parse::<f64>().map_err(|e| bad(line, key, e))?;
                cfg.datagen.float_dist.params.insert(param.to_string(), v);
            } else if let Some(param) = key.strip_prefix("datagen.strlen.") {
                let v = value.parse::<f64>().map_err(|e| bad(line, key, e))?;
                cfg.datagen.strlen_dist.params.insert(param.to_string(), v);
            } else if let Some(param) = key.strip_prefix("spacing.dist.") {
                let v = value.parse::<f64>().map_err(|e| bad(line, key, e))?;
                cfg.datagen.spacing_dist.params.insert(param.to_string(), v);
            } else {
                return Err(ConfigError::UnknownKey { line, key: key.to_string() });
            }
        }
    }
    Ok(())
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

impl RunConfig {
    /// Structural invariants; environment checks live in the prerequisite
    /// check list.
    pub fn validate(&self) -> Result<(), String> {
        if self.sensors == 0 {
            return Err("sensors: need at least one simulated sensor".into());
        }
        if self.clients < 2 {
            return Err(format!(
                "clients: the scalability test needs a standby client, so k >= 2 (got {})",
                self.clients
            ));
        }
        if self.records < 2 * self.clients as u64 - 1 {
            return Err(format!(
                "records: need at least 2k-1 = {} for clients = {}",
                2 * self.clients as u64 - 1,
                self.clients
            ));
        }
        if self.sensors < self.clients {
            return Err(format!(
                "sensors: every client needs at least one sensor; got {} sensors for {} clients",
                self.sensors, self.clients
            ));
        }
        if self.instances == 0 || self.instances > self.clients {
            return Err(format!(
                "instances: must be in [1, clients], got {}",
                self.instances
            ));
        }
        if !(0.0..1.0).contains(&self.query_fraction) {
            return Err(format!("query_fraction: must be in [0, 1), got {}", self.query_fraction));
        }
        if self.batch_size == 0 {
            return Err("batch_size: must be positive".into());
        }
        if self.template_weights.iter().all(|w| *w == 0) {
            return Err("template_weights: at least one weight must be positive".into());
        }
        if self.query_sensors_min == 0 || self.query_sensors_min > self.query_sensors_max {
            return Err("query_sensors_min/max: need 1 <= min <= max".into());
        }
        if self.warmup_cap_seconds < 0.0 || self.min_run_seconds <= 0.0 {
            return Err("warmup_seconds/min_run_seconds: must be nonnegative/positive".into());
        }
        if self.client_rate < 0.0 {
            return Err("client_rate: must be nonnegative".into());
        }
        self.datagen.float_dist.validate().map_err(|e| e.to_string())?;
        self.datagen.strlen_dist.validate().map_err(|e| e.to_string())?;
        self.datagen.spacing_dist.validate().map_err(|e| e.to_string())?;
        if self.datagen.int_lambda <= 0.0 {
            return Err("datagen.lambda: must be strictly positive".into());
        }
        if self.datagen.spacing_interval_ms == 0 {
            return Err("spacing.interval_ms: must be positive".into());
        }
        if self.datagen.replay_set_count == 0 {
            return Err("replay.set_count: must be positive".into());
        }
        if matches!(self.datagen.method, GenMethod::Replay | GenMethod::Model)
            && self.datagen.sample_file.is_none()
        {
            return Err(format!(
                "datagen.sample_file: required for the {} method",
                self.datagen.method.name()
            ));
        }
        if self.sut.nodes == 0 {
            return Err("sut.nodes: need at least one node".into());
        }
        if self.sut.segment_points == 0 {
            return Err("sut.segment_points: must be positive".into());
        }
        if self.sut.modeled_rate <= 0.0 {
            return Err("modeled.rate: must be strictly positive".into());
        }
        if !(self.sut.modeled_linearity > 0.0 && self.sut.modeled_linearity <= 1.0) {
            return Err(format!(
                "modeled.linearity: must be in (0, 1], got {}",
                self.sut.modeled_linearity
            ));
        }
        if self.sut.modeled_compression_ratio <= 0.0 {
            return Err("modeled.compression_ratio: must be strictly positive".into());
        }
        if self.cost.record_bytes <= 0.0 || self.cost.per_record_storage_usd < 0.0 {
            return Err("cost.record_bytes/per_record_usd: must be positive/nonnegative".into());
        }
        Ok(())
    }

    /// Replay corpus size: explicit key, or the scale profile's default;
    /// 0 means "derive from the loaded sample".
    pub fn replay_points_per_set(&self) -> u64 {
        self.datagen.replay_points_per_set.unwrap_or(if self.desk_scale {
            10_000
        } else {
            6_710_886
        })
    }

    /// The sensor generation profile derived from the datagen keys.
    pub fn sensor_profile(&self) -> SensorProfile {
        SensorProfile {
            kinds: self.datagen.value_kind.to_kind_policy(),
            float_dist: self.datagen.float_dist.clone(),
            int_dist: DistributionSpec::poisson(self.datagen.int_lambda),
            strlen_dist: self.datagen.strlen_dist.clone(),
            max_string_len: self.datagen.max_string_len,
            spacing: if self.datagen.spacing_even {
                SpacingSpec::Even { interval_ms: self.datagen.spacing_interval_ms }
            } else {
                SpacingSpec::Uneven { inter_arrival: self.datagen.spacing_dist.clone() }
            },
        }
    }

    pub fn workload_params(&self) -> WorkloadParams {
        WorkloadParams {
            batch_size: self.batch_size,
            query_fraction: self.query_fraction,
            template_weights: self.template_weights,
            query_cfg: QueryGenConfig {
                subset_min: self.query_sensors_min,
                subset_max: self.query_sensors_max,
                downsample_agg: self.downsample_agg,
                ..QueryGenConfig::default()
            },
            start_timestamp_ms: self.start_timestamp_ms,
        }
    }

    /// Every config key, normalized, in sorted order. This is both the
    /// report echo and the canonical emitted form (`emit(parse(f))`).
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            map.insert(k.to_string(), v);
        };
        put("sensors", self.sensors.to_string());
        put("clients", self.clients.to_string());
        put("instances", self.instances.to_string());
        put("records", self.records.to_string());
        put("seed", self.seed.to_string());
        put("desk_scale", self.desk_scale.to_string());
        put("warmup_seconds", self.warmup_cap_seconds.to_string());
        put("min_run_seconds", self.min_run_seconds.to_string());
        put("min_per_sensor_rate", self.min_per_sensor_rate.to_string());
        put("client_rate", self.client_rate.to_string());
        put("query_fraction", self.query_fraction.to_string());
        put("batch_size", self.batch_size.to_string());
        put(
            "template_weights",
            format!(
                "{},{},{},{}",
                self.template_weights[0],
                self.template_weights[1],
                self.template_weights[2],
                self.template_weights[3]
            ),
        );
        put("query_sensors_min", self.query_sensors_min.to_string());
        put("query_sensors_max", self.query_sensors_max.to_string());
        put("start_timestamp_ms", self.start_timestamp_ms.to_string());
        put("progress_interval_seconds", self.progress_interval_seconds.to_string());
        put("scheduler_tick_ms", self.scheduler_tick_ms.to_string());
        put("downsample_agg", self.downsample_agg.name().to_string());
        put("datagen.method", self.datagen.method.name().to_string());
        put("datagen.value_kind", self.datagen.value_kind.name().to_string());
        put("datagen.dist", self.datagen.float_dist.kind.name().to_string());
        for (name, v) in &self.datagen.float_dist.params {
            put(&format!("datagen.dist.{name}"), v.to_string());
        }
        put("datagen.lambda", self.datagen.int_lambda.to_string());
        put("datagen.strlen", self.datagen.strlen_dist.kind.name().to_string());
        for (name, v) in &self.datagen.strlen_dist.params {
            put(&format!("datagen.strlen.{name}"), v.to_string());
        }
        put("datagen.max_string_len", self.datagen.max_string_len.to_string());
        if let Some(p) = &self.datagen.sample_file {
            put("datagen.sample_file", p.display().to_string());
        }
        put("replay.set_count", self.datagen.replay_set_count.to_string());
        if let Some(v) = self.datagen.replay_points_per_set {
            put("replay.points_per_set", v.to_string());
        }
        put("spacing.mode", if self.datagen.spacing_even { "even" } else { "uneven" }.to_string());
        put("spacing.interval_ms", self.datagen.spacing_interval_ms.to_string());
        put("spacing.dist", self.datagen.spacing_dist.kind.name().to_string());
        for (name, v) in &self.datagen.spacing_dist.params {
            put(&format!("spacing.dist.{name}"), v.to_string());
        }
        put("sut.adapter", self.sut.adapter.clone());
        if let Some(p) = &self.sut.data_dir {
            put("sut.data_dir", p.display().to_string());
        }
        put("sut.nodes", self.sut.nodes.to_string());
        put("sut.scalable", self.sut.scalable.to_string());
        put("sut.segment_points", self.sut.segment_points.to_string());
        put("sut.codec", if self.sut.raw_codec { "none" } else { "auto" }.to_string());
        put("modeled.rate", self.sut.modeled_rate.to_string());
        put("modeled.linearity", self.sut.modeled_linearity.to_string());
        put("modeled.mode", self.sut.modeled_mode.name().to_string());
        put("modeled.compression_ratio", self.sut.modeled_compression_ratio.to_string());
        put("cost.storage_component_usd", self.cost.storage_component_usd.to_string());
        put("cost.storage_capacity_bytes", self.cost.storage_capacity_bytes.to_string());
        put("cost.before_usd", self.cost.system_cost_before_usd.to_string());
        put("cost.after_usd", self.cost.system_cost_after_usd.to_string());
        put("cost.per_record_usd", self.cost.per_record_storage_usd.to_string());
        put("cost.record_bytes", self.cost.record_bytes.to_string());
        map
    }

    /// Canonical `key=value` emission (sorted keys).
    pub fn emit(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.echo() {
            out.push_str(&k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        }
        out
    }
}
