//! The covariance-dimension estimator on point clouds of known dimension.
//!
//! cargo run --release --example moebius_fixture

use qrc::dimension::{covariance_dimension, DimensionParams};
use qrc::fixtures::{gaussian_cloud, jittered_line, moebius_strip};

fn main() -> qrc::error::Result<()> {
    let p = DimensionParams::default();
    let clouds = [
        ("Möbius strip, R = 2", moebius_strip(5000, 2.0, 0.5, 1), 3),
        ("Möbius strip, R = 0.5", moebius_strip(5000, 0.5, 0.25, 1), 3),
        ("jittered line", jittered_line(5000, 1e-8, 1), 3),
        ("Gaussian in R^5", gaussian_cloud(5000, 5, 1), 5),
    ];
    for (name, points, dim) in clouds {
        println!("{name:<24} D_c {:.3}", covariance_dimension(&points, dim, &p)?.d_c);
    }
    Ok(())
}
