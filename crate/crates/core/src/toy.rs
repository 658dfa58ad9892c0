//! Seeded synthetic regression where the least-squares fit is slightly worse
//! than the null model under AIC.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const DEFAULT_TOY_SEED: u64 = 31;
pub const DEFAULT_TOY_SIZE: usize = 30;

/// Simple linear regression data `y = a + b x + e`.
///
/// `x` is centred and `e` is orthogonal to `1` and `x`, scaled so that the
/// slope estimate equals its standard error (noise variance fixed at the
/// full-model estimate `SSR / n`). The deviance gain of the slope is then
/// exactly one, so the full model's AIC exceeds the null model's by one.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionToy {
    pub seed: u64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn regression_toy(seed: u64, n: usize) -> RegressionToy {
    assert!(n >= 3, "need at least three observations");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| StandardNormal.sample(&mut rng)).collect() };
    let mut x = draw(n);
    let mut e = draw(n);

    center(&mut x);
    center(&mut e);
    let xx: f64 = x.iter().map(|v| v * v).sum();
    let xe: f64 = x.iter().zip(&e).map(|(a, b)| a * b).sum();
    for (ei, xi) in e.iter_mut().zip(&x) {
        *ei -= xe / xx * xi;
    }
    let ee: f64 = e.iter().map(|v| v * v).sum();
    // sigma^2 = s^2 ee / n and SE^2 = sigma^2 / xx; choose s so SE = 1.
    let s = (n as f64 * xx / ee).sqrt();
    let intercept = 3.0;
    let slope = 1.0;
    let y = x
        .iter()
        .zip(&e)
        .map(|(xi, ei)| intercept + slope * xi + s * ei)
        .collect();
    RegressionToy { seed, x, y }
}

fn center(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}
