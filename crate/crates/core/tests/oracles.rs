//! Closed forms checked against independent numerical references.

mod common;

use common::quad::{integrate, integrate2};
use common::wavepacket::dispersed_correlation;
use common::{bivariate_normal, conditional_by_quadrature, log_uniform, rng, uniform};
use pairtime::analytic::{self, ConditionalDensity};
use pairtime::model::{from_rho_form, to_rho_form, LinkParams, SourceParams, SourceParamsRho, TemporalCovariance};

fn table_set(k: usize) -> TemporalCovariance {
    match k {
        1 => TemporalCovariance::new(0.9551, 1.136e-9, 1.312e-9),
        2 => TemporalCovariance::new(-0.1483, 0.23607e-9, 0.25285e-9),
        _ => TemporalCovariance::new(-0.4443, 0.21094e-9, 0.20949e-9),
    }
    .unwrap()
}

fn random_cov(r: &mut rand_chacha::ChaCha8Rng) -> TemporalCovariance {
    TemporalCovariance::new(
        uniform(r, -0.99, 0.99),
        log_uniform(r, 1e-11, 2e-9),
        log_uniform(r, 1e-11, 2e-9),
    )
    .unwrap()
}

#[test]
fn joint_density_is_the_bivariate_normal_and_normalised() {
    let mut r = rng(71);
    for _ in 0..10 {
        let c = random_cov(&mut r);
        for &(x, y) in &[(0.0, 0.0), (0.3, -1.2), (-2.0, -1.5), (1.0, 2.5)] {
            let (t1, t2) = (x * c.tau1, y * c.tau2);
            let a = analytic::joint_density(t1, t2, &c);
            let b = bivariate_normal(t1, t2, c.rho_t, c.tau1, c.tau2);
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300), "{a} vs {b}");
        }
        // Scaled coordinates: density in units of 1/(tau1 tau2).
        let f = |x: f64, y: f64| analytic::joint_density(x * c.tau1, y * c.tau2, &c) * c.tau1 * c.tau2;
        let total = integrate2(&f, (-40.0, 40.0), (-40.0, 40.0), 1e-10);
        assert!((total - 1.0).abs() < 1e-6, "{total} for {c:?}");
    }
}

#[test]
fn set1_joint_density_is_normalised() {
    let c = table_set(1);
    let f = |x: f64, y: f64| analytic::joint_density(x * c.tau1, y * c.tau2, &c) * c.tau1 * c.tau2;
    let total = integrate2(&f, (-40.0, 40.0), (-40.0, 40.0), 1e-10);
    assert!((total - 1.0).abs() < 1e-6, "{total}");
}

#[test]
fn marginal_is_the_integral_of_the_joint() {
    let mut r = rng(72);
    for _ in 0..10 {
        let c = random_cov(&mut r);
        for x in [-2.5, -0.7, 0.0, 1.3] {
            let t1 = x * c.tau1;
            let q = integrate(&|y| analytic::joint_density(t1, y * c.tau2, &c) * c.tau2, -40.0, 40.0, 1e-13);
            let m = analytic::marginal_density(t1, &c);
            assert!((q - m).abs() * c.tau1 < 1e-9, "{q} vs {m}");
        }
    }
}

#[test]
fn conditional_density_matches_quadrature() {
    let mut r = rng(73);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let c = random_cov(&mut r);
        let center = uniform(&mut r, -2.0, 2.0) * c.tau2;
        let width = log_uniform(&mut r, 1e-3, 5.0) * c.tau2;
        let cd = ConditionalDensity::new(&c, center, width).unwrap();
        let m = cd.moments();
        let t1s: Vec<f64> = (-40..=40).map(|k| m.mean + k as f64 * 0.15 * m.std_dev).collect();
        let q = conditional_by_quadrature(&c, center, width, &t1s);
        for (t1, q) in t1s.iter().zip(q) {
            worst = worst.max((cd.eval(*t1) * c.tau1 - q).abs());
        }
    }
    assert!(worst < 1e-6, "sup-norm {worst}");
}

#[test]
fn set1_conditional_matches_quadrature_on_fine_grid() {
    let c = table_set(1);
    let (center, width) = (0.0, 100e-12);
    let cd = ConditionalDensity::new(&c, center, width).unwrap();
    let t1s: Vec<f64> = (0..1001).map(|k| (-5.0 + 0.01 * k as f64) * c.tau1).collect();
    let q = conditional_by_quadrature(&c, center, width, &t1s);
    let worst = t1s
        .iter()
        .zip(&q)
        .map(|(t, q)| (cd.eval(*t) * c.tau1 - q).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "sup-norm {worst}");
}

#[test]
fn tiny_window_matches_the_limit_density() {
    let c = table_set(3);
    let cd = ConditionalDensity::new(&c, 0.1e-9, c.tau2 * 1e-4).unwrap();
    let worst = (0..1001)
        .map(|k| (-6.0 + 0.012 * k as f64) * c.tau1)
        .map(|t| ((cd.eval(t) - analytic::conditional_limit_density(t, 0.1e-9, &c)) * c.tau1).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "sup-norm {worst}");
}

#[test]
fn opposite_direction_is_the_swapped_formula() {
    // Density of t2 given t1 in a window, from quadrature over the original joint.
    let mut r = rng(77);
    for _ in 0..5 {
        let c = random_cov(&mut r);
        let center = uniform(&mut r, -1.5, 1.5) * c.tau1;
        let width = log_uniform(&mut r, 1e-2, 3.0) * c.tau1;
        let swapped = ConditionalDensity::new(&c.transposed(), center, width).unwrap();
        let (lo, hi) = ((center - 0.5 * width) / c.tau1, (center + 0.5 * width) / c.tau1);
        let p = |x: f64, y: f64| bivariate_normal(x, y, c.rho_t, 1.0, 1.0);
        let tol = 1e-12 * (hi - lo).min(1.0);
        let den = integrate2(&p, (lo, hi), (-40.0, 40.0), tol);
        for k in -20..=20 {
            let y = 0.25 * k as f64;
            let num = integrate(&|x| p(x, y), lo, hi, tol);
            let a = swapped.eval(y * c.tau2) * c.tau2;
            assert!((a - num / den).abs() < 1e-6, "{a} vs {}", num / den);
        }
    }
}

#[test]
fn conditional_moments_match_quadrature() {
    let mut r = rng(74);
    for _ in 0..10 {
        let c = random_cov(&mut r);
        let center = uniform(&mut r, -2.0, 2.0) * c.tau2;
        let width = log_uniform(&mut r, 1e-3, 5.0) * c.tau2;
        let cd = ConditionalDensity::new(&c, center, width).unwrap();
        let m = cd.moments();
        let (lo, hi) = (m.mean / c.tau1 - 30.0, m.mean / c.tau1 + 30.0);
        let f = |x: f64| cd.eval(x * c.tau1) * c.tau1;
        let m0 = integrate(&f, lo, hi, 1e-13);
        let m1 = integrate(&|x| x * f(x), lo, hi, 1e-13);
        let m2 = integrate(&|x| x * x * f(x), lo, hi, 1e-13);
        let sd = (m2 - m1 * m1).sqrt();
        assert!((m0 - 1.0).abs() < 1e-9);
        assert!((m1 - m.mean / c.tau1).abs() < 1e-8, "{m1} vs {}", m.mean / c.tau1);
        assert!((sd - m.std_dev / c.tau1).abs() < 1e-8, "{sd} vs {}", m.std_dev / c.tau1);
    }
}

#[test]
fn rho_form_matches_spectral_intensity_moments() {
    let mut r = rng(75);
    for _ in 0..10 {
        let sigma = log_uniform(&mut r, 1e11, 1e13);
        let tau_p = log_uniform(&mut r, 0.05, 20.0) * 2.0 / sigma;
        let src = SourceParams::pulsed(sigma, tau_p).unwrap();
        let rf = to_rho_form(&src).unwrap();
        // |φ|² in units where frequencies are scaled by sigma.
        let tp = tau_p * sigma;
        let phi2 = |a: f64, b: f64| (-2.0 * (a - b).powi(2) - (a + b).powi(2) * tp * tp / 2.0).exp();
        let ext = 12.0 * (1.0 + 1.0 / tp);
        let tol = 1e-12;
        let z = integrate2(&phi2, (-ext, ext), (-ext, ext), tol);
        let v1 = integrate2(&|a, b| a * a * phi2(a, b), (-ext, ext), (-ext, ext), tol) / z;
        let v12 = integrate2(&|a, b| a * b * phi2(a, b), (-ext, ext), (-ext, ext), tol) / z;
        let sigma0 = (2.0 * v1).sqrt() * sigma;
        let rho = v12 / v1;
        assert!((rf.sigma0 / sigma0 - 1.0).abs() < 1e-7, "{} vs {sigma0}", rf.sigma0);
        assert!((rf.rho - rho).abs() < 1e-7, "{} vs {rho}", rf.rho);
    }
}

#[test]
fn rho_form_example_matches_moment_integrals() {
    let p = from_rho_form(&SourceParamsRho::new(1e12, -0.9).unwrap()).unwrap();
    // Recover (sigma0, rho) from |φ|² built with the returned (sigma, tau_p).
    let (s, t) = (p.sigma / 1e12, p.tau_p().unwrap() * 1e12);
    let phi2 = |a: f64, b: f64| (-2.0 * (a - b).powi(2) / (s * s) - (a + b).powi(2) * t * t / 2.0).exp();
    let ext = 40.0;
    let z = integrate2(&phi2, (-ext, ext), (-ext, ext), 1e-12);
    let v1 = integrate2(&|a, b| a * a * phi2(a, b), (-ext, ext), (-ext, ext), 1e-12) / z;
    let v12 = integrate2(&|a, b| a * b * phi2(a, b), (-ext, ext), (-ext, ext), 1e-12) / z;
    assert!(((2.0 * v1).sqrt() - 1.0).abs() < 1e-7);
    assert!((v12 / v1 + 0.9).abs() < 1e-7);
}

#[test]
fn rho_t_and_width_agree_with_dispersed_wavepacket() {
    let mut r = rng(76);
    const SAMPLES: usize = 1_000_000;
    for i in 0..50 {
        let sigma = log_uniform(&mut r, 1e11, 1e13);
        let kappa = log_uniform(&mut r, 0.2, 5.0) / (sigma * sigma);
        let tau_p = log_uniform(&mut r, 0.2, 5.0) * 2.0 / sigma;
        let src = SourceParams::pulsed(sigma, tau_p).unwrap();
        let link = LinkParams::new(-kappa / 1e4, 1e4).unwrap();
        let mc = dispersed_correlation(sigma, tau_p, link.beta * link.length, SAMPLES, 1000 + i);
        let rho = analytic::rho_t_of(&src, &link);
        assert!((mc.r - rho).abs() < 3.0 * mc.std_error, "draw {i}: mc {} ± {} vs {rho}", mc.r, mc.std_error);
        let w = analytic::tau1(&src, &link).unwrap();
        let se_w = w / (2.0 * SAMPLES as f64).sqrt();
        assert!((mc.std1 - w).abs() < 4.0 * se_w, "draw {i}: width {} vs {w}", mc.std1);
    }
}
