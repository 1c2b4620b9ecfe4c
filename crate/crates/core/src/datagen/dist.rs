//! Random variate samplers behind [`DistributionSpec`].
//!
//! Each sampler consumes draws from the caller's xoshiro stream and nothing
//! else, so streams stay reproducible. Inversion is used where a closed-form
//! inverse CDF exists; Poisson switches from Knuth's product method to
//! Hörmann's PTRS transformed rejection at lambda >= 10, and the Zipf sampler
//! is rejection-inversion (valid for any theta in (0, 1]).

use alloc::vec::Vec;

use crate::num::ln_gamma;
use crate::rng::Xoshiro256;

#[derive(Debug, Clone)]
pub(super) enum Sampler {
    Constant(f64),
    Uniform { lo: f64, span: f64 },
    Exponential { rate: f64 },
    Pareto { scale: f64, inv_shape: f64 },
    Poisson(Poisson),
    Zipfian(Zipf),
    Histogram { cumulative: Vec<f64>, total: f64 },
}

impl Sampler {
    pub(super) fn sample(&self, rng: &mut Xoshiro256) -> f64 {
        match self {
            Sampler::Constant(v) => *v,
            Sampler::Uniform { lo, span } => lo + rng.next_f64() * span,
            Sampler::Exponential { rate } => -libm::log(1.0 - rng.next_f64()) / rate,
            Sampler::Pareto { scale, inv_shape } => {
                scale * libm::pow(1.0 - rng.next_f64(), -inv_shape)
            }
            Sampler::Poisson(p) => p.sample(rng),
            Sampler::Zipfian(z) => z.sample(rng),
            Sampler::Histogram { cumulative, total } => {
                let u = rng.next_f64() * total;
                let idx = cumulative.partition_point(|c| *c <= u).min(cumulative.len() - 1);
                idx as f64
            }
        }
    }
}

/// Poisson sampler. Knuth's method below 10; PTRS above.
#[derive(Debug, Clone)]
pub(super) struct Poisson {
    lambda: f64,
    method: PoissonMethod,
}

#[derive(Debug, Clone)]
enum PoissonMethod {
    Knuth { limit: f64 },
    Ptrs { b: f64, a: f64, inv_alpha: f64, v_r: f64, ln_lambda: f64 },
}

impl Poisson {
    pub(super) fn new(lambda: f64) -> Self {
        let method = if lambda < 10.0 {
            PoissonMethod::Knuth { limit: libm::exp(-lambda) }
        } else {
            let b = 0.931 + 2.53 * libm::sqrt(lambda);
            let a = -0.059 + 0.02483 * b;
            PoissonMethod::Ptrs {
                b,
                a,
                inv_alpha: 1.1239 + 1.1328 / (b - 3.4),
                v_r: 0.9277 - 3.6224 / (b - 2.0),
                ln_lambda: libm::log(lambda),
            }
        };
        Poisson { lambda, method }
    }

    fn sample(&self, rng: &mut Xoshiro256) -> f64 {
        match &self.method {
            PoissonMethod::Knuth { limit } => {
                let mut k = 0u64;
                let mut p = 1.0;
                loop {
                    k += 1;
                    p *= rng.next_f64();
                    if p <= *limit {
                        return (k - 1) as f64;
                    }
                }
            }
            PoissonMethod::Ptrs { b, a, inv_alpha, v_r, ln_lambda } => loop {
                let u = rng.next_f64() - 0.5;
                let v = rng.next_f64();
                let u_shifted = 0.5 - libm::fabs(u);
                let k = libm::floor((2.0 * a / u_shifted + b) * u + self.lambda + 0.43);
                if u_shifted >= 0.07 && v <= *v_r {
                    return k;
                }
                if k < 0.0 || (u_shifted < 0.013 && v > u_shifted) {
                    continue;
                }
                let lhs = libm::log(v * inv_alpha / (a / (u_shifted * u_shifted) + b));
                let rhs = k * ln_lambda - self.lambda - ln_gamma(k + 1.0);
                if lhs <= rhs {
                    return k;
                }
            },
        }
    }
}

/// Zipf sampler over ranks `1..=n` with exponent `theta`, by
/// rejection-inversion (Hörmann & Derflinger).
#[derive(Debug, Clone)]
pub(super) struct Zipf {
    n: f64,
    theta: f64,
    h_x1: f64,
    h_n: f64,
    cut: f64,
}

impl Zipf {
    pub(super) fn new(n: u64, theta: f64) -> Self {
        let n = n as f64;
        let h_x1 = h_integral(1.5, theta) - 1.0;
        let h_n = h_integral(n + 0.5, theta);
        let cut = 2.0 - h_integral_inverse(h_integral(2.5, theta) - h(2.0, theta), theta);
        Zipf { n, theta, h_x1, h_n, cut }
    }

    fn sample(&self, rng: &mut Xoshiro256) -> f64 {
        loop {
            let u = self.h_n + rng.next_f64() * (self.h_x1 - self.h_n);
            let x = h_integral_inverse(u, self.theta);
            let k = libm::floor(x + 0.5).clamp(1.0, self.n);
            if k - x <= self.cut {
                return k;
            }
            if u >= h_integral(k + 0.5, self.theta) - h(k, self.theta) {
                return k;
            }
        }
    }
}

fn h_integral(x: f64, theta: f64) -> f64 {
    if theta == 1.0 {
        libm::log(x)
    } else {
        (libm::pow(x, 1.0 - theta) - 1.0) / (1.0 - theta)
    }
}

fn h(x: f64, theta: f64) -> f64 {
    libm::pow(x, -theta)
}

fn h_integral_inverse(u: f64, theta: f64) -> f64 {
    if theta == 1.0 {
        libm::exp(u)
    } else {
        libm::pow((1.0 + u * (1.0 - theta)).max(0.0), 1.0 / (1.0 - theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_of(sampler: &Sampler, seed: u64, n: usize) -> f64 {
        let mut rng = Xoshiro256::from_seed(seed);
        (0..n).map(|_| sampler.sample(&mut rng)).sum::<f64>() / n as f64
    }

    #[test]
    fn poisson_small_and_large_lambda_means() {
        for lambda in [0.5, 4.0, 10.0, 48.0, 300.0] {
            let sampler = Sampler::Poisson(Poisson::new(lambda));
            let n = 200_000;
            let mean = mean_of(&sampler, 99, n);
            // 5 standard errors.
            let tol = 5.0 * (lambda / n as f64).sqrt();
            assert!((mean - lambda).abs() < tol, "lambda={lambda}: mean={mean}");
        }
    }

    #[test]
    fn poisson_draws_are_nonnegative_integers() {
        let sampler = Sampler::Poisson(Poisson::new(32.0));
        let mut rng = Xoshiro256::from_seed(5);
        for _ in 0..10_000 {
            let x = sampler.sample(&mut rng);
            assert!(x >= 0.0 && x == libm::floor(x), "got {x}");
        }
    }

    #[test]
    fn zipf_ranks_stay_in_range_and_match_direct_mean() {
        for theta in [0.5, 0.99, 1.0] {
            let n = 1000u64;
            let zipf = Zipf::new(n, theta);
            // Direct-summation oracle for the mean rank.
            let mut norm = 0.0;
            let mut mean = 0.0;
            for k in 1..=n {
                let p = libm::pow(k as f64, -theta);
                norm += p;
                mean += k as f64 * p;
            }
            mean /= norm;

            let mut rng = Xoshiro256::from_seed(1234);
            let draws = 200_000;
            let mut sum = 0.0;
            let mut var_acc = 0.0;
            for _ in 0..draws {
                let x = zipf.sample(&mut rng);
                assert!((1.0..=n as f64).contains(&x));
                sum += x;
                var_acc += (x - mean) * (x - mean);
            }
            let sample_mean = sum / draws as f64;
            let se = (var_acc / draws as f64 / draws as f64).sqrt();
            assert!(
                (sample_mean - mean).abs() < 5.0 * se.max(1e-9),
                "theta={theta}: sample {sample_mean} vs {mean}"
            );
        }
    }

    #[test]
    fn histogram_respects_weights() {
        let sampler = Sampler::Histogram { cumulative: alloc::vec![1.0, 1.0, 4.0], total: 4.0 };
        let mut rng = Xoshiro256::from_seed(3);
        let mut counts = [0u32; 3];
        for _ in 0..40_000 {
            counts[sampler.sample(&mut rng) as usize] += 1;
        }
        // Weights 1, 0, 3: middle bucket never drawn, last ~3x the first.
        assert_eq!(counts[1], 0);
        let ratio = counts[2] as f64 / counts[0] as f64;
        assert!((2.7..3.3).contains(&ratio), "ratio {ratio}");
    }
}
