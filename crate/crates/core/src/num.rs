//! Small numeric helpers shared by the generators.
//!
//! All transcendental functions go through `libm` rather than the platform
//! math library so that draw sequences are bit-identical everywhere.

use crate::rng::Xoshiro256;

/// ln Γ(x) for x > 0. Stirling series after shifting the argument above 10;
/// absolute error is below 1e-12 in that regime, plenty for rejection
/// sampling bounds.
pub(crate) fn ln_gamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= libm::log(x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0)));
    const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_7;
    shift + HALF_LN_TWO_PI + (x - 0.5) * libm::log(x) - x + series
}

/// Standard normal CDF.
pub(crate) fn norm_cdf(z: f64) -> f64 {
    0.5 * (1.0 + libm::erf(z / core::f64::consts::SQRT_2))
}

/// Round to nearest, ties to even.
pub(crate) fn round_half_to_even(x: f64) -> f64 {
    let t = libm::trunc(x);
    let frac = x - t;
    if frac == 0.5 || frac == -0.5 {
        let f = libm::floor(x);
        // Pick the even neighbor of the tie.
        if libm::fmod(f, 2.0) == 0.0 {
            f
        } else {
            f + 1.0
        }
    } else {
        libm::round(x)
    }
}

/// Box-Muller standard normal source. Keeps the spare draw so each normal
/// consumes a fixed amount of the underlying stream.
#[derive(Debug, Clone, Default)]
pub(crate) struct NormalSource {
    spare: Option<f64>,
}

impl NormalSource {
    pub(crate) fn next(&mut self, rng: &mut Xoshiro256) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the log finite.
        let u1 = 1.0 - rng.next_f64();
        let u2 = rng.next_f64();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }
}
