//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

pub mod quad;
pub mod wavepacket;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Log-uniform draw in `[lo, hi]`.
pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Bivariate normal density written out directly from its definition.
pub fn bivariate_normal(t1: f64, t2: f64, rho: f64, tau1: f64, tau2: f64) -> f64 {
    let (x, y) = (t1 / tau1, t2 / tau2);
    let q = (x * x + y * y - 2.0 * rho * x * y) / (1.0 - rho * rho);
    (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * tau1 * tau2 * (1.0 - rho * rho).sqrt())
}

/// Windowed conditional density from its defining ratio of integrals, in
/// units of 1/tau1, evaluated at each of `t1s`.
pub fn conditional_by_quadrature(c: &pairtime::TemporalCovariance, center: f64, width: f64, t1s: &[f64]) -> Vec<f64> {
    let (lo, hi) = ((center - 0.5 * width) / c.tau2, (center + 0.5 * width) / c.tau2);
    let p = |x: f64, y: f64| bivariate_normal(x, y, c.rho_t, 1.0, 1.0);
    let tol = 1e-12 * (hi - lo).min(1.0);
    let den = quad::integrate2(&p, (-40.0, 40.0), (lo, hi), tol);
    t1s.iter()
        .map(|&t1| quad::integrate(&|y| p(t1 / c.tau1, y), lo, hi, tol) / den)
        .collect()
}
