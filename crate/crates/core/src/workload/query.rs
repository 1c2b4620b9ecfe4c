//! Query templates and randomized query synthesis.
//!
//! Four dashboard-style templates: raw observations over a time range,
//! aggregated statistics, down-sampled observations, and condition-filtered
//! observations. Generated specs always fall inside the observed data window
//! and validate against their template invariants.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::point::{Timestamp, Value, ValueKind};
use crate::rng::Xoshiro256;
use crate::workload::{SensorSpace, SensorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryTemplate {
    TimeRange,
    Aggregation,
    Downsample,
    Filtered,
}

impl QueryTemplate {
    pub const ALL: [QueryTemplate; 4] = [
        QueryTemplate::TimeRange,
        QueryTemplate::Aggregation,
        QueryTemplate::Downsample,
        QueryTemplate::Filtered,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QueryTemplate::TimeRange => "time_range",
            QueryTemplate::Aggregation => "aggregation",
            QueryTemplate::Downsample => "downsample",
            QueryTemplate::Filtered => "filtered",
        }
    }

    pub fn index(self) -> usize {
        match self {
            QueryTemplate::TimeRange => 0,
            QueryTemplate::Aggregation => 1,
            QueryTemplate::Downsample => 2,
            QueryTemplate::Filtered => 3,
        }
    }
}

/// Aggregate functions, in canonical result order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AggFn {
    Avg,
    Max,
    Min,
    First,
    Last,
}

impl AggFn {
    pub const ALL: [AggFn; 5] = [AggFn::Avg, AggFn::Max, AggFn::Min, AggFn::First, AggFn::Last];

    pub fn name(self) -> &'static str {
        match self {
            AggFn::Avg => "avg",
            AggFn::Max => "max",
            AggFn::Min => "min",
            AggFn::First => "first",
            AggFn::Last => "last",
        }
    }

    pub fn parse(s: &str) -> Option<AggFn> {
        Some(match s {
            "avg" => AggFn::Avg,
            "max" => AggFn::Max,
            "min" => AggFn::Min,
            "first" => AggFn::First,
            "last" => AggFn::Last,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
    Ne,
}

impl CompareOp {
    pub const ALL: [CompareOp; 6] = [
        CompareOp::Eq,
        CompareOp::Lt,
        CompareOp::Gt,
        CompareOp::Le,
        CompareOp::Ge,
        CompareOp::Ne,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "=",
            CompareOp::Lt => "<",
            CompareOp::Gt => ">",
            CompareOp::Le => "<=",
            CompareOp::Ge => ">=",
            CompareOp::Ne => "!=",
        }
    }
}

/// Filter condition `<sensor> <op> <value>`.
///
/// The condition is evaluated against each candidate observation's own value;
/// the named sensor is the one whose configured value range the constant was
/// drawn from. Numeric comparisons promote integers to floats and use IEEE
/// semantics; string comparisons are lexicographic on bytes; comparing a
/// string observation against a numeric constant (or vice versa) never
/// matches.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub sensor: Arc<str>,
    pub op: CompareOp,
    pub value: Value,
}

impl Condition {
    pub fn matches(&self, observed: &Value) -> bool {
        let ord = match (observed, &self.value) {
            (Value::Text(a), Value::Text(b)) => a.as_bytes().cmp(b.as_bytes()),
            (Value::Text(_), _) | (_, Value::Text(_)) => return false,
            (a, b) => {
                let (a, b) = (a.as_f64().unwrap(), b.as_f64().unwrap());
                match a.partial_cmp(&b) {
                    Some(ord) => ord,
                    None => return false,
                }
            }
        };
        match self.op {
            CompareOp::Eq => ord.is_eq(),
            CompareOp::Lt => ord.is_lt(),
            CompareOp::Gt => ord.is_gt(),
            CompareOp::Le => ord.is_le(),
            CompareOp::Ge => ord.is_ge(),
            CompareOp::Ne => ord.is_ne(),
        }
    }
}

/// One query: a template plus its parameters. Sensor lists are sorted and
/// deduplicated; ranges are inclusive on both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySpec {
    pub template: QueryTemplate,
    pub sensors: Vec<Arc<str>>,
    pub start_ms: Timestamp,
    pub end_ms: Timestamp,
    /// Aggregation only: nonempty, sorted, deduplicated.
    pub agg_functions: Vec<AggFn>,
    /// Downsample only: bucket width, > 0. Buckets align to `start_ms`.
    pub unit_ms: i64,
    /// Downsample only: the per-bucket aggregate (avg by default).
    pub bucket_agg: AggFn,
    /// Filtered only.
    pub condition: Option<Condition>,
}

impl QuerySpec {
    pub fn time_range(sensors: Vec<Arc<str>>, start_ms: Timestamp, end_ms: Timestamp) -> Self {
        QuerySpec {
            template: QueryTemplate::TimeRange,
            sensors: normalize_sensors(sensors),
            start_ms,
            end_ms,
            agg_functions: Vec::new(),
            unit_ms: 0,
            bucket_agg: AggFn::Avg,
            condition: None,
        }
    }

    pub fn aggregation(
        sensors: Vec<Arc<str>>,
        start_ms: Timestamp,
        end_ms: Timestamp,
        mut agg_functions: Vec<AggFn>,
    ) -> Self {
        agg_functions.sort_unstable();
        agg_functions.dedup();
        QuerySpec {
            template: QueryTemplate::Aggregation,
            sensors: normalize_sensors(sensors),
            start_ms,
            end_ms,
            agg_functions,
            unit_ms: 0,
            bucket_agg: AggFn::Avg,
            condition: None,
        }
    }

    pub fn downsample(
        sensors: Vec<Arc<str>>,
        start_ms: Timestamp,
        end_ms: Timestamp,
        unit_ms: i64,
        bucket_agg: AggFn,
    ) -> Self {
        QuerySpec {
            template: QueryTemplate::Downsample,
            sensors: normalize_sensors(sensors),
            start_ms,
            end_ms,
            agg_functions: Vec::new(),
            unit_ms,
            bucket_agg,
            condition: None,
        }
    }

    pub fn filtered(
        sensors: Vec<Arc<str>>,
        start_ms: Timestamp,
        end_ms: Timestamp,
        condition: Condition,
    ) -> Self {
        QuerySpec {
            template: QueryTemplate::Filtered,
            sensors: normalize_sensors(sensors),
            start_ms,
            end_ms,
            agg_functions: Vec::new(),
            unit_ms: 0,
            bucket_agg: AggFn::Avg,
            condition: Some(condition),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sensors.is_empty() {
            return Err(Error::MalformedQuery { reason: "sensor list is empty".into() });
        }
        if self.start_ms > self.end_ms {
            return Err(Error::MalformedQuery {
                reason: format!("start {} after end {}", self.start_ms, self.end_ms),
            });
        }
        match self.template {
            QueryTemplate::Aggregation => {
                if self.agg_functions.is_empty() {
                    return Err(Error::MalformedQuery {
                        reason: "aggregation needs at least one function".into(),
                    });
                }
            }
            QueryTemplate::Downsample => {
                if self.unit_ms <= 0 {
                    return Err(Error::MalformedQuery {
                        reason: format!("downsample unit must be positive, got {}", self.unit_ms),
                    });
                }
            }
            QueryTemplate::Filtered => {
                if self.condition.is_none() {
                    return Err(Error::MalformedQuery {
                        reason: "filtered query needs a condition".into(),
                    });
                }
            }
            QueryTemplate::TimeRange => {}
        }
        Ok(())
    }
}

fn normalize_sensors(mut sensors: Vec<Arc<str>>) -> Vec<Arc<str>> {
    sensors.sort_unstable();
    sensors.dedup();
    sensors
}

/// Knobs for query synthesis.
#[derive(Debug, Clone)]
pub struct QueryGenConfig {
    /// Bounds on the sensor subset size (clamped to the sensor count).
    pub subset_min: u32,
    pub subset_max: u32,
    /// Smallest generated range width.
    pub min_width_ms: i64,
    /// Widest generated range as a fraction of the observed window.
    pub width_fraction: f64,
    /// Bucket aggregate stamped onto downsample queries.
    pub downsample_agg: AggFn,
}

impl Default for QueryGenConfig {
    fn default() -> Self {
        QueryGenConfig {
            subset_min: 1,
            subset_max: 4,
            min_width_ms: 1_000,
            width_fraction: 0.05,
            downsample_agg: AggFn::Avg,
        }
    }
}

/// Generate one query of `template` inside the observed `window`.
pub fn gen_query(
    template: QueryTemplate,
    rng: &mut Xoshiro256,
    space: &SensorSpace,
    window: (Timestamp, Timestamp),
    cfg: &QueryGenConfig,
) -> Result<QuerySpec> {
    let (win_lo, win_hi) = window;
    if win_hi < win_lo {
        return Err(Error::EmptyWindow);
    }
    let span = win_hi - win_lo;

    // Range width: uniform over [min_width, width_fraction * span], clamped
    // into the window.
    let max_width = ((span as f64) * cfg.width_fraction) as i64;
    let width_lo = cfg.min_width_ms.min(span).max(0);
    let width_hi = max_width.clamp(width_lo, span);
    let width = width_lo + rng.below((width_hi - width_lo + 1) as u64) as i64;
    let start_ms = win_lo + rng.below((span - width + 1) as u64) as i64;
    let end_ms = start_ms + width;

    let sensors = pick_sensors(rng, space, cfg);
    // `avg` is undefined over string sensors; restrict the candidate
    // aggregates when the subset contains one.
    let has_text = sensors
        .iter()
        .any(|id| space.by_id(id).map(|s| s.kind == ValueKind::Text).unwrap_or(false));

    Ok(match template {
        QueryTemplate::TimeRange => QuerySpec::time_range(sensors, start_ms, end_ms),
        QueryTemplate::Aggregation => {
            let candidates: &[AggFn] = if has_text {
                &[AggFn::Max, AggFn::Min, AggFn::First, AggFn::Last]
            } else {
                &AggFn::ALL
            };
            let mut funcs: Vec<AggFn> =
                candidates.iter().copied().filter(|_| rng.next_bool()).collect();
            if funcs.is_empty() {
                funcs.push(candidates[rng.below(candidates.len() as u64) as usize]);
            }
            QuerySpec::aggregation(sensors, start_ms, end_ms, funcs)
        }
        QueryTemplate::Downsample => {
            let unit_lo = 1_000.min(width.max(1));
            let unit_hi = 1_000.max(width);
            let unit_ms = unit_lo + rng.below((unit_hi - unit_lo + 1) as u64) as i64;
            let bucket_agg = if has_text && cfg.downsample_agg == AggFn::Avg {
                AggFn::Last
            } else {
                cfg.downsample_agg
            };
            QuerySpec::downsample(sensors, start_ms, end_ms, unit_ms, bucket_agg)
        }
        QueryTemplate::Filtered => {
            let pick = &sensors[rng.below(sensors.len() as u64) as usize];
            let spec = space.by_id(pick).expect("picked sensor exists");
            let condition = Condition {
                sensor: pick.clone(),
                op: CompareOp::ALL[rng.below(CompareOp::ALL.len() as u64) as usize],
                value: condition_value(rng, spec),
            };
            QuerySpec::filtered(sensors, start_ms, end_ms, condition)
        }
    })
}

fn pick_sensors(rng: &mut Xoshiro256, space: &SensorSpace, cfg: &QueryGenConfig) -> Vec<Arc<str>> {
    let total = space.len() as u64;
    let lo = cfg.subset_min.max(1) as u64;
    let hi = (cfg.subset_max as u64).max(lo).min(total);
    let lo = lo.min(hi);
    let size = lo + rng.below(hi - lo + 1);
    let mut picked = Vec::with_capacity(size as usize);
    while (picked.len() as u64) < size {
        let idx = rng.below(total) as usize;
        let id = space.get(idx).id.clone();
        if !picked.contains(&id) {
            picked.push(id);
        }
    }
    picked
}

/// Draw a condition constant inside the sensor's configured value range.
fn condition_value(rng: &mut Xoshiro256, spec: &SensorSpec) -> Value {
    let (lo, hi) = spec.value_range;
    match spec.kind {
        ValueKind::Float => Value::Float(lo + rng.next_f64() * (hi - lo)),
        ValueKind::Integer => {
            let lo = lo as i64;
            let hi = (hi as i64).max(lo);
            Value::Integer(lo + rng.below((hi - lo + 1) as u64) as i64)
        }
        ValueKind::Text => {
            let len = 1 + rng.below(8) as usize;
            let mut s = alloc::string::String::with_capacity(len);
            for _ in 0..len {
                let idx = rng.below(crate::datagen::STRING_ALPHABET.len() as u64) as usize;
                s.push(crate::datagen::STRING_ALPHABET[idx] as char);
            }
            Value::Text(s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::{SensorProfile, SensorSpace};

    fn space() -> SensorSpace {
        SensorSpace::build(8, &SensorProfile::default_float(), 42).unwrap()
    }

    #[test]
    fn point_window_pins_the_range() {
        let space = space();
        let mut rng = Xoshiro256::from_seed(1);
        for template in QueryTemplate::ALL {
            let spec =
                gen_query(template, &mut rng, &space, (0, 0), &QueryGenConfig::default()).unwrap();
            assert_eq!((spec.start_ms, spec.end_ms), (0, 0));
            spec.validate().unwrap();
        }
    }

    #[test]
    fn generated_specs_validate_and_stay_in_window() {
        let space = space();
        let mut rng = Xoshiro256::from_seed(2);
        let window = (1_000, 2_000_000);
        for i in 0..2000 {
            let template = QueryTemplate::ALL[i % 4];
            let spec =
                gen_query(template, &mut rng, &space, window, &QueryGenConfig::default()).unwrap();
            spec.validate().unwrap();
            assert!(spec.start_ms >= window.0 && spec.end_ms <= window.1);
            assert!(!spec.sensors.is_empty() && spec.sensors.len() <= 4);
            match template {
                QueryTemplate::Aggregation => assert!(!spec.agg_functions.is_empty()),
                QueryTemplate::Downsample => assert!(spec.unit_ms > 0),
                QueryTemplate::Filtered => {
                    let cond = spec.condition.as_ref().unwrap();
                    assert!(spec.sensors.contains(&cond.sensor));
                }
                QueryTemplate::TimeRange => {}
            }
        }
    }

    #[test]
    fn filtered_constants_respect_the_sensor_range() {
        let space = space();
        let mut rng = Xoshiro256::from_seed(3);
        for _ in 0..500 {
            let spec = gen_query(
                QueryTemplate::Filtered,
                &mut rng,
                &space,
                (0, 10_000_000),
                &QueryGenConfig::default(),
            )
            .unwrap();
            let cond = spec.condition.unwrap();
            let sensor = space.by_id(&cond.sensor).unwrap();
            if let Some(v) = cond.value.as_f64() {
                assert!(
                    v >= sensor.value_range.0 && v <= sensor.value_range.1,
                    "value {v} outside {:?}",
                    sensor.value_range
                );
            }
        }
    }

    #[test]
    fn inverted_window_is_rejected() {
        let space = space();
        let mut rng = Xoshiro256::from_seed(4);
        let err = gen_query(
            QueryTemplate::TimeRange,
            &mut rng,
            &space,
            (10, 0),
            &QueryGenConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err, Error::EmptyWindow);
    }

    #[test]
    fn condition_semantics() {
        let cond = Condition {
            sensor: "s".into(),
            op: CompareOp::Ge,
            value: Value::Float(1.5),
        };
        assert!(cond.matches(&Value::Float(1.5)));
        assert!(cond.matches(&Value::Integer(2)));
        assert!(!cond.matches(&Value::Integer(1)));
        assert!(!cond.matches(&Value::Text("zzz".into())));

        let text = Condition {
            sensor: "s".into(),
            op: CompareOp::Lt,
            value: Value::Text("m".into()),
        };
        assert!(text.matches(&Value::Text("abc".into())));
        assert!(!text.matches(&Value::Text("zeta".into())));
        assert!(!text.matches(&Value::Float(0.0)));
    }
}
