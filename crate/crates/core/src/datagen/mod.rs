//! Sensor data generation.
//!
//! Three methods produce `(timestamp, value)` streams: parametric
//! distributions ([`DistributionSpec`] / [`GeneratorState`]), periodic replay
//! of a user sample ([`replay::SampleSet`]), and synthesis from a fitted
//! generator model ([`model::GeneratorModel`]). All of them are deterministic
//! under a seed and per-sensor timestamps are strictly increasing.

pub mod model;
pub mod replay;

mod dist;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num::round_half_to_even;
use crate::point::{Timestamp, Value, ValueKind};
use crate::rng::Xoshiro256;
use dist::{Poisson, Sampler, Zipf};

/// Distribution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistKind {
    Constant,
    Uniform,
    Zipfian,
    Histogram,
    Poisson,
    Pareto,
    Exponential,
}

impl DistKind {
    pub fn name(self) -> &'static str {
        match self {
            DistKind::Constant => "constant",
            DistKind::Uniform => "uniform",
            DistKind::Zipfian => "zipfian",
            DistKind::Histogram => "histogram",
            DistKind::Poisson => "poisson",
            DistKind::Pareto => "pareto",
            DistKind::Exponential => "exponential",
        }
    }

    pub fn parse(name: &str) -> Option<DistKind> {
        Some(match name {
            "constant" => DistKind::Constant,
            "uniform" => DistKind::Uniform,
            "zipfian" => DistKind::Zipfian,
            "histogram" => DistKind::Histogram,
            "poisson" => DistKind::Poisson,
            "pareto" => DistKind::Pareto,
            "exponential" => DistKind::Exponential,
            _ => return None,
        })
    }
}

/// A distribution with named real parameters.
///
/// Omitted parameters fall back to documented defaults (`lambda=10`,
/// `shape=3`, `scale=1`, `rate=1`, `lo=0`, `hi=1`, `theta=0.99`, `n=1000`,
/// `value=0`); histogram weights `w0..wN` have no default and must be given.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSpec {
    pub kind: DistKind,
    pub params: BTreeMap<String, f64>,
}

impl DistributionSpec {
    pub fn new(kind: DistKind) -> Self {
        DistributionSpec { kind, params: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn constant(value: f64) -> Self {
        Self::new(DistKind::Constant).with("value", value)
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        Self::new(DistKind::Uniform).with("lo", lo).with("hi", hi)
    }

    pub fn exponential(rate: f64) -> Self {
        Self::new(DistKind::Exponential).with("rate", rate)
    }

    pub fn pareto(shape: f64, scale: f64) -> Self {
        Self::new(DistKind::Pareto).with("shape", shape).with("scale", scale)
    }

    pub fn poisson(lambda: f64) -> Self {
        Self::new(DistKind::Poisson).with("lambda", lambda)
    }

    pub fn zipfian(n: u64, theta: f64) -> Self {
        Self::new(DistKind::Zipfian).with("n", n as f64).with("theta", theta)
    }

    pub fn histogram(weights: &[f64]) -> Self {
        let mut spec = Self::new(DistKind::Histogram);
        for (i, w) in weights.iter().enumerate() {
            spec.params.insert(format!("w{i}"), *w);
        }
        spec
    }

    fn get(&self, name: &str, default: f64) -> f64 {
        self.params.get(name).copied().unwrap_or(default)
    }

    fn expect_finite(&self, name: &str, v: f64) -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidParam { field: name.to_string(), reason: "must be finite".into() })
        }
    }

    fn positive(&self, name: &str, default: f64) -> Result<f64> {
        let v = self.expect_finite(name, self.get(name, default))?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::InvalidParam {
                field: name.to_string(),
                reason: "must be strictly positive".into(),
            })
        }
    }

    fn allowed_params(&self) -> &'static [&'static str] {
        match self.kind {
            DistKind::Constant => &["value"],
            DistKind::Uniform => &["lo", "hi"],
            DistKind::Zipfian => &["n", "theta"],
            DistKind::Histogram => &[],
            DistKind::Poisson => &["lambda"],
            DistKind::Pareto => &["shape", "scale"],
            DistKind::Exponential => &["rate"],
        }
    }

    /// Validate the parameter set against the family's invariants.
    pub fn validate(&self) -> Result<()> {
        for name in self.params.keys() {
            let ok = if self.kind == DistKind::Histogram {
                name.strip_prefix('w').is_some_and(|i| i.parse::<u32>().is_ok())
            } else {
                self.allowed_params().contains(&name.as_str())
            };
            if !ok {
                return Err(Error::InvalidParam {
                    field: name.clone(),
                    reason: format!("unknown parameter for {}", self.kind.name()),
                });
            }
        }
        self.build_sampler().map(|_| ())
    }

    fn build_sampler(&self) -> Result<Sampler> {
        Ok(match self.kind {
            DistKind::Constant => {
                Sampler::Constant(self.expect_finite("value", self.get("value", 0.0))?)
            }
            DistKind::Uniform => {
                let lo = self.expect_finite("lo", self.get("lo", 0.0))?;
                let hi = self.expect_finite("hi", self.get("hi", 1.0))?;
                if lo >= hi {
                    return Err(Error::InvalidParam {
                        field: "lo".into(),
                        reason: format!("requires lo < hi, got lo={lo} hi={hi}"),
                    });
                }
                Sampler::Uniform { lo, span: hi - lo }
            }
            DistKind::Exponential => Sampler::Exponential { rate: self.positive("rate", 1.0)? },
            DistKind::Pareto => Sampler::Pareto {
                scale: self.positive("scale", 1.0)?,
                inv_shape: 1.0 / self.positive("shape", 3.0)?,
            },
            DistKind::Poisson => Sampler::Poisson(Poisson::new(self.positive("lambda", 10.0)?)),
            DistKind::Zipfian => {
                let theta = self.expect_finite("theta", self.get("theta", 0.99))?;
                if !(theta > 0.0 && theta <= 1.0) {
                    return Err(Error::InvalidParam {
                        field: "theta".into(),
                        reason: format!("must be in (0, 1], got {theta}"),
                    });
                }
                let n = self.expect_finite("n", self.get("n", 1000.0))?;
                if n < 1.0 || n != libm::floor(n) {
                    return Err(Error::InvalidParam {
                        field: "n".into(),
                        reason: format!("must be a positive integer, got {n}"),
                    });
                }
                Sampler::Zipfian(Zipf::new(n as u64, theta))
            }
            DistKind::Histogram => {
                let mut weights = Vec::new();
                while let Some(w) = self.params.get(&format!("w{}", weights.len())) {
                    weights.push(*w);
                }
                if weights.is_empty() || weights.len() != self.params.len() {
                    return Err(Error::InvalidParam {
                        field: "w0".into(),
                        reason: "histogram weights must be contiguous w0..wN".into(),
                    });
                }
                let mut total = 0.0;
                let mut cumulative = Vec::with_capacity(weights.len());
                for (i, w) in weights.iter().enumerate() {
                    if !w.is_finite() || *w < 0.0 {
                        return Err(Error::InvalidParam {
                            field: format!("w{i}"),
                            reason: "weights must be nonnegative".into(),
                        });
                    }
                    total += w;
                    cumulative.push(total);
                }
                if total <= 0.0 {
                    return Err(Error::InvalidParam {
                        field: "w0".into(),
                        reason: "weights must have a positive sum".into(),
                    });
                }
                Sampler::Histogram { cumulative, total }
            }
        })
    }
}

/// A deterministic draw stream for one distribution.
///
/// Two states built from equal `(spec, seed)` produce identical streams.
#[derive(Debug, Clone)]
pub struct GeneratorState {
    sampler: Sampler,
    rng: Xoshiro256,
}

/// Build a generator for `spec`, validating its parameters.
pub fn make_generator(spec: &DistributionSpec, seed: u64) -> Result<GeneratorState> {
    Ok(GeneratorState { sampler: spec.build_sampler()?, rng: Xoshiro256::from_seed(seed) })
}

impl GeneratorState {
    pub fn next_f64(&mut self) -> f64 {
        self.sampler.sample(&mut self.rng)
    }
}

/// Timestamp spacing for one sensor.
#[derive(Debug, Clone, PartialEq)]
pub enum SpacingSpec {
    /// Fixed interval in milliseconds.
    Even { interval_ms: u32 },
    /// Stochastic gaps; draws are milliseconds, rounded up to at least 1 ms.
    Uneven { inter_arrival: DistributionSpec },
}

impl SpacingSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SpacingSpec::Even { interval_ms } => {
                if *interval_ms == 0 {
                    return Err(Error::InvalidParam {
                        field: "interval_ms".into(),
                        reason: "must be positive".into(),
                    });
                }
                Ok(())
            }
            SpacingSpec::Uneven { inter_arrival } => inter_arrival.validate(),
        }
    }
}

/// Gaps are clamped to a day so a heavy-tailed draw cannot run the clock off
/// the end of the i64 range.
const MAX_GAP_MS: i64 = 86_400_000;

/// Per-sensor timestamp state. `next_timestamp` advances and returns, so the
/// first emitted timestamp is `start + gap`.
#[derive(Debug, Clone)]
pub struct SpacingState {
    current: Timestamp,
    gaps: GapSource,
}

#[derive(Debug, Clone)]
enum GapSource {
    Even(i64),
    Uneven(GeneratorState),
}

impl SpacingState {
    pub fn new(spec: &SpacingSpec, start: Timestamp, seed: u64) -> Result<Self> {
        let gaps = match spec {
            SpacingSpec::Even { interval_ms } => GapSource::Even(*interval_ms as i64),
            SpacingSpec::Uneven { inter_arrival } => {
                GapSource::Uneven(make_generator(inter_arrival, seed)?)
            }
        };
        Ok(SpacingState { current: start, gaps })
    }

    pub fn next_timestamp(&mut self) -> Timestamp {
        let gap = match &mut self.gaps {
            GapSource::Even(interval) => *interval,
            GapSource::Uneven(gen) => {
                let draw = gen.next_f64();
                if draw.is_finite() {
                    (libm::ceil(draw) as i64).clamp(1, MAX_GAP_MS)
                } else {
                    MAX_GAP_MS
                }
            }
        };
        self.current = self.current.saturating_add(gap);
        self.current
    }
}

/// Alphabet for generated strings.
pub const STRING_ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789";

/// Generated string lengths are clamped to `[1, max_len]`.
pub const DEFAULT_MAX_STRING_LEN: u32 = 256;

/// String value source: a length distribution plus a character stream.
#[derive(Debug, Clone)]
pub struct StringGen {
    lengths: GeneratorState,
    chars: Xoshiro256,
    max_len: u32,
}

impl StringGen {
    pub fn new(length_dist: &DistributionSpec, max_len: u32, seed: u64) -> Result<Self> {
        Ok(StringGen {
            lengths: make_generator(length_dist, seed)?,
            chars: Xoshiro256::from_seed(seed ^ 0xA5A5_5A5A_0F0F_F0F0),
            max_len: max_len.max(1),
        })
    }

    pub fn next_string(&mut self) -> String {
        let draw = round_half_to_even(self.lengths.next_f64());
        let len = if draw.is_finite() {
            (draw as i64).clamp(1, self.max_len as i64) as usize
        } else {
            1
        };
        let mut s = String::with_capacity(len);
        for _ in 0..len {
            let idx = self.chars.below(STRING_ALPHABET.len() as u64) as usize;
            s.push(STRING_ALPHABET[idx] as char);
        }
        s
    }
}

/// Typed value source for one sensor.
#[derive(Debug, Clone)]
pub enum ValueGen {
    /// Draws rounded half-to-even to integers.
    Integer(GeneratorState),
    Float(GeneratorState),
    Text(StringGen),
}

impl ValueGen {
    pub fn kind(&self) -> ValueKind {
        match self {
            ValueGen::Integer(_) => ValueKind::Integer,
            ValueGen::Float(_) => ValueKind::Float,
            ValueGen::Text(_) => ValueKind::Text,
        }
    }

    pub fn next_value(&mut self) -> Value {
        match self {
            ValueGen::Integer(gen) => {
                let draw = round_half_to_even(gen.next_f64());
                Value::Integer(if draw.is_finite() { draw as i64 } else { 0 })
            }
            ValueGen::Float(gen) => Value::Float(gen.next_f64()),
            ValueGen::Text(gen) => Value::Text(gen.next_string()),
        }
    }
}
