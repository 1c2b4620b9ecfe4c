//! Moment checks: for every distribution family the empirical mean of 1e6
//! draws must land within 5 standard errors of the analytic mean (tighter
//! bounds where stated). Analytic means and variances are computed here,
//! independently of the samplers.

use tsbench_core::datagen::{make_generator, DistributionSpec};

const DRAWS: usize = 1_000_000;

fn empirical_mean(spec: &DistributionSpec, seed: u64) -> f64 {
    let mut gen = make_generator(spec, seed).unwrap();
    let mut sum = 0.0;
    for _ in 0..DRAWS {
        sum += gen.next_f64();
    }
    sum / DRAWS as f64
}

fn assert_within_se(spec: &DistributionSpec, mean: f64, variance: f64, seed: u64) {
    let got = empirical_mean(spec, seed);
    let se = (variance / DRAWS as f64).sqrt();
    let tol = 5.0 * se;
    assert!(
        (got - mean).abs() <= tol,
        "{:?}: mean {got} vs analytic {mean} (tolerance {tol})",
        spec.kind
    );
}

#[test]
fn constant_mean() {
    assert_eq!(empirical_mean(&DistributionSpec::constant(5.0), 1), 5.0);
}

#[test]
fn uniform_mean() {
    // mean (lo+hi)/2, variance (hi-lo)^2 / 12.
    assert_within_se(&DistributionSpec::uniform(2.0, 8.0), 5.0, 36.0 / 12.0, 2);
}

#[test]
fn exponential_mean_within_one_percent() {
    // rate 2: analytic mean 1/2; also bound by the 1% example tolerance.
    let spec = DistributionSpec::exponential(2.0);
    assert_within_se(&spec, 0.5, 0.25, 7);
    let got = empirical_mean(&spec, 7);
    assert!((got - 0.5).abs() / 0.5 < 0.01, "exponential mean {got}");
}

#[test]
fn pareto_mean_within_two_percent() {
    // shape 3, scale 1: mean = shape*scale/(shape-1) = 1.5,
    // variance = shape/((shape-1)^2 (shape-2)) = 0.75.
    let spec = DistributionSpec::pareto(3.0, 1.0);
    assert_within_se(&spec, 1.5, 0.75, 7);
    let got = empirical_mean(&spec, 7);
    assert!((got - 1.5).abs() / 1.5 < 0.02, "pareto mean {got}");
}

#[test]
fn poisson_mean_small_and_large_lambda() {
    assert_within_se(&DistributionSpec::poisson(4.0), 4.0, 4.0, 3);
    assert_within_se(&DistributionSpec::poisson(10.0), 10.0, 10.0, 4);
    assert_within_se(&DistributionSpec::poisson(200.0), 200.0, 200.0, 5);
}

#[test]
fn zipfian_mean_matches_direct_summation() {
    let n = 1000u64;
    let theta = 0.99;
    // Direct summation oracle for mean and variance of the rank.
    let mut norm = 0.0;
    let mut mean = 0.0;
    let mut second = 0.0;
    for k in 1..=n {
        let p = (k as f64).powf(-theta);
        norm += p;
        mean += k as f64 * p;
        second += (k as f64) * (k as f64) * p;
    }
    mean /= norm;
    second /= norm;
    assert_within_se(&DistributionSpec::zipfian(n, theta), mean, second - mean * mean, 6);
}

#[test]
fn histogram_mean_matches_weighted_buckets() {
    let weights = [1.0, 2.0, 3.0, 4.0];
    let total: f64 = weights.iter().sum();
    let mean: f64 =
        weights.iter().enumerate().map(|(i, w)| i as f64 * w / total).sum();
    let second: f64 =
        weights.iter().enumerate().map(|(i, w)| (i * i) as f64 * w / total).sum();
    assert_within_se(&DistributionSpec::histogram(&weights), mean, second - mean * mean, 8);
}
