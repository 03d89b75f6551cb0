//! Synthetic point clouds with known intrinsic dimension, used to pin the
//! behaviour of the covariance-dimension estimator.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::seeding::rng_from_seed;

/// Points on the standard Möbius strip in R^3.
///
/// `u` runs once around the centre circle of radius `radius`, `v` across the
/// band of half-width `half_width`. Parameters are sampled uniformly.
pub fn moebius_strip(n: usize, radius: f64, half_width: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|_| {
            let u = rng.gen_range(0.0..std::f64::consts::TAU);
            let v = rng.gen_range(-half_width..half_width);
            let r = radius + v * (u / 2.0).cos();
            vec![r * u.cos(), r * u.sin(), v * (u / 2.0).sin()]
        })
        .collect()
}

/// Evenly spaced points on a line through R^3 with independent uniform jitter
/// of amplitude `jitter` on every coordinate.
pub fn jittered_line(n: usize, jitter: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    let dir = [1.0, 2.0, -1.0];
    (0..n)
        .map(|i| {
            let t = i as f64 / n as f64;
            dir.iter()
                .map(|d| d * t + jitter * rng.gen_range(-1.0..1.0))
                .collect()
        })
        .collect()
}

/// Isotropic standard normal cloud in R^dim.
pub fn gaussian_cloud(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}
