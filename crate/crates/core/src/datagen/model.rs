//! Fitted generator model: empirical inverse CDF + lag-1 autoregression.
//!
//! The model captures the two sample properties that drive both storage
//! compression and query behavior: the marginal value distribution (a
//! 256-knot piecewise-linear inverse CDF) and first-order temporal
//! correlation (a lag-1 coefficient applied to a latent Gaussian state, whose
//! rank maps through the inverse CDF). Timestamp synthesis reuses the
//! sample's inter-arrival mean and spread. Fitting is deterministic;
//! synthesis is deterministic under a seed.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::num::{norm_cdf, NormalSource};
use crate::point::{Timestamp, Value};
use crate::rng::Xoshiro256;

pub const QUANTILE_KNOTS: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorModel {
    /// Nondecreasing inverse CDF sampled at 256 evenly spaced ranks.
    pub quantile_table: Vec<f64>,
    /// Lag-1 autocorrelation of the sample values, in (-1, 1).
    pub ar1_coeff: f64,
    /// Standard deviation of the AR(1) residuals in value space. Zero means
    /// synthesis is noiseless (a constant sample reproduces exactly).
    pub residual_sd: f64,
    /// Mean of the sample inter-arrival gaps, milliseconds.
    pub gap_mean_ms: f64,
    /// Standard deviation of the sample inter-arrival gaps.
    pub gap_sd_ms: f64,
}

/// Fit a model to a numeric sample. Deterministic: no randomness is drawn.
pub fn fit_model(sample: &[(Timestamp, f64)]) -> Result<GeneratorModel> {
    if sample.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: sample.len() });
    }
    if sample.iter().any(|(_, v)| !v.is_finite()) {
        return Err(Error::NonNumericSample);
    }

    let n = sample.len();
    let mut sorted: Vec<f64> = sample.iter().map(|(_, v)| *v).collect();
    sorted.sort_unstable_by(f64::total_cmp);

    // Type-7 quantiles at ranks j/(KNOTS-1).
    let mut quantile_table = Vec::with_capacity(QUANTILE_KNOTS);
    for j in 0..QUANTILE_KNOTS {
        let p = j as f64 / (QUANTILE_KNOTS - 1) as f64;
        let h = p * (n - 1) as f64;
        let lo = libm::floor(h) as usize;
        let hi = (lo + 1).min(n - 1);
        let frac = h - lo as f64;
        quantile_table.push(sorted[lo] + frac * (sorted[hi] - sorted[lo]));
    }

    let mean = sample.iter().map(|(_, v)| v).sum::<f64>() / n as f64;
    let var: f64 = sample.iter().map(|(_, v)| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let ar1_coeff = if var > 0.0 {
        let lag1: f64 = sample
            .windows(2)
            .map(|w| (w[0].1 - mean) * (w[1].1 - mean))
            .sum::<f64>()
            / n as f64;
        (lag1 / var).clamp(-0.999, 0.999)
    } else {
        0.0
    };
    let residual_sd = libm::sqrt((var * (1.0 - ar1_coeff * ar1_coeff)).max(0.0));

    let gaps: Vec<f64> = sample.windows(2).map(|w| (w[1].0 - w[0].0) as f64).collect();
    let gap_mean_ms = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let gap_var = gaps.iter().map(|g| (g - gap_mean_ms) * (g - gap_mean_ms)).sum::<f64>()
        / gaps.len() as f64;

    Ok(GeneratorModel {
        quantile_table,
        ar1_coeff,
        residual_sd,
        gap_mean_ms,
        gap_sd_ms: libm::sqrt(gap_var.max(0.0)),
    })
}

impl GeneratorModel {
    pub fn validate(&self) -> Result<()> {
        if self.quantile_table.len() != QUANTILE_KNOTS {
            return Err(Error::InvalidParam {
                field: "quantile_table".into(),
                reason: "expected 256 knots".into(),
            });
        }
        if self.quantile_table.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParam {
                field: "quantile_table".into(),
                reason: "must be nondecreasing".into(),
            });
        }
        if !(self.ar1_coeff > -1.0 && self.ar1_coeff < 1.0) {
            return Err(Error::InvalidParam {
                field: "ar1_coeff".into(),
                reason: "must be in (-1, 1)".into(),
            });
        }
        if self.residual_sd < 0.0 {
            return Err(Error::InvalidParam {
                field: "residual_sd".into(),
                reason: "must be nonnegative".into(),
            });
        }
        Ok(())
    }

    /// Evaluate the inverse CDF at rank `u` in [0, 1].
    pub fn quantile(&self, u: f64) -> f64 {
        let pos = u.clamp(0.0, 1.0) * (QUANTILE_KNOTS - 1) as f64;
        let lo = libm::floor(pos) as usize;
        let hi = (lo + 1).min(QUANTILE_KNOTS - 1);
        let frac = pos - lo as f64;
        self.quantile_table[lo] + frac * (self.quantile_table[hi] - self.quantile_table[lo])
    }
}

/// Synthesis state for one model stream.
#[derive(Debug, Clone)]
pub struct ModelSynth {
    rng: Xoshiro256,
    normals: NormalSource,
    latent: f64,
    clock: Timestamp,
    started: bool,
}

impl ModelSynth {
    /// Start a stream at workload clock `start`; the first point is stamped
    /// exactly at `start`.
    pub fn new(start: Timestamp, seed: u64) -> Self {
        ModelSynth {
            rng: Xoshiro256::from_seed(seed),
            normals: NormalSource::default(),
            latent: 0.0,
            clock: start,
            started: false,
        }
    }

    pub fn next(&mut self, model: &GeneratorModel) -> (Timestamp, Value) {
        // Latent AR(1) with unit stationary variance; its rank drives the
        // inverse CDF so the marginal matches the fitted table.
        let phi = model.ar1_coeff;
        if model.residual_sd > 0.0 {
            let noise_sd = libm::sqrt((1.0 - phi * phi).max(0.0));
            self.latent = phi * self.latent + noise_sd * self.normals.next(&mut self.rng);
        } else {
            self.latent *= phi;
        }
        let value = model.quantile(norm_cdf(self.latent));

        if self.started {
            let gap = if model.gap_sd_ms > 0.0 {
                model.gap_mean_ms + model.gap_sd_ms * self.normals.next(&mut self.rng)
            } else {
                model.gap_mean_ms
            };
            let gap = if gap.is_finite() { libm::ceil(gap) as i64 } else { 1 };
            self.clock = self.clock.saturating_add(gap.clamp(1, 86_400_000));
        }
        self.started = true;
        (self.clock, Value::Float(value))
    }
}
