//! Acceptance criteria. Each test writes one PASS/FAIL line per criterion to
//! stderr, bypassing output capture, and fails when it fails.

mod common;

use std::io::Write;
use std::time::Instant;

use common::wavepacket::dispersed_correlation;
use common::{conditional_by_quadrature, log_uniform, rng, uniform};
use pairtime::analytic::{self, ConditionalDensity, LogGrid, WidthKind};
use pairtime::fit::{fit_batch, FitConfig};
use pairtime::herald::{centroid_curve_model, centroid_slope, narrowing_curve_model, HeraldDirection};
use pairtime::io::{FitReport, ReportInputs};
use pairtime::reproduce::{self, Options};
use pairtime::sampler::{sample, DetectorModel};
use pairtime::{LinkParams, SourceParams, TemporalCovariance};

fn fig4_link() -> LinkParams {
    LinkParams::new(-1.15e-26, 1e4).unwrap()
}

fn report(n: u32, pass: bool, started: Instant, detail: &str) {
    let _ = writeln!(
        std::io::stderr(),
        "{} criterion {n}: {detail} ({:.2} s)",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    );
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

#[test]
fn criterion_1_optimum() {
    let t0 = Instant::now();
    let o = analytic::optimum(None, &fig4_link()).unwrap();
    let checks = [
        ("tau_p_opt", o.tau_p_opt, 15.2e-12),
        ("sigma_opt", o.sigma_opt, 1.32e11),
        ("tau1_abs", o.tau1_abs, 15.2e-12),
        ("tau1h_abs", o.tau1h_abs, 15.2e-12),
        ("tau_abs", o.tau1h_dt_abs, 21.4e-12),
    ];
    let pass = checks.iter().all(|&(_, x, t)| within(x, t, 0.01));
    let detail: Vec<String> = checks.iter().map(|(n, x, t)| format!("{n} {x:.4e} (target {t:e} ± 1%)")).collect();
    report(1, pass, t0, &detail.join(", "));
    assert!(pass);
}

#[test]
fn criterion_2_central_minimum_ratio() {
    let t0 = Instant::now();
    let link = fig4_link();
    let o = analytic::optimum(Some(3.29e12), &link).unwrap();
    let w = analytic::widths(&SourceParams::pulsed(3.29e12, o.tau_p_opt).unwrap(), &link).unwrap();
    let ratio = w.tau1h_0 / w.tau1;
    let pass = (ratio - 0.113).abs() <= 0.002;
    report(2, pass, t0, &format!("tau1h_0/tau1 at tau_p_opt = {ratio:.5} (target 0.113 ± 0.002)"));
    assert!(pass);
}

#[test]
fn criterion_3_narrowing_limit_from_fits() {
    let t0 = Instant::now();
    let targets = reproduce::targets().unwrap();
    let opts = Options::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, set) in targets.sets.iter().enumerate() {
        let r = reproduce::table1_fit(set, i, &opts).unwrap();
        let rep = FitReport::new(&r, ReportInputs::default());
        let (x, se) = (rep.ratio.value, rep.ratio.std_error.unwrap());
        let sigma = (se * se + set.ratio_error * set.ratio_error).sqrt();
        let dev = (x - set.ratio).abs() / sigma;
        let ok = dev <= 3.0;
        pass &= ok;
        let noiseless = (1.0 - set.cov.rho_t * set.cov.rho_t).sqrt();
        parts.push(format!(
            "{} {x:.5} ± {se:.5} vs {} ± {} ({dev:.2} combined σ, {}; noise-free value {noiseless:.5})",
            set.name,
            set.ratio,
            set.ratio_error,
            if ok { "ok" } else { "outside band" }
        ));
    }
    report(3, pass, t0, &parts.join("; "));
    assert!(pass, "see decisions ledger: the published rho_t of set 3 implies a ratio outside its measured band");
}

#[test]
fn criterion_4_ratio_curve_threshold() {
    let t0 = Instant::now();
    let c = reproduce::targets().unwrap().sets[0].cov;
    let a = analytic::narrowing_ratio_limit(&c);
    let mut widths: Vec<f64> = (0..=300).map(|k| 1e-15 + k as f64 * 1e-12).collect();
    widths.push(1e-9);
    let curve = narrowing_curve_model(&c, 0.0, &widths, HeraldDirection::OnTwo).unwrap();
    let (head, tail) = curve.points.split_at(curve.points.len() - 1);
    let max_pp = head.iter().map(|p| p.ratio - a).fold(0.0, f64::max);
    let at_1ns = tail[0].ratio - a;
    let pass = max_pp <= 0.01 && at_1ns > 0.05;
    let rel_max = max_pp / a;
    let rel_1ns = at_1ns / a;
    let rel_pass = rel_max <= 0.01 && rel_1ns > 0.05;
    report(
        4,
        pass,
        t0,
        &format!(
            "offset from asymptote {a:.5}: max {max_pp:.5} for dT <= 300 ps, {at_1ns:.5} at 1 ns \
             (ratio units); relative reading {rel_max:.4} / {rel_1ns:.4} would {}",
            if rel_pass { "also pass" } else { "fail" }
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_centroid_slope() {
    let t0 = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for set in reproduce::targets().unwrap().sets {
        let c = set.cov;
        let centers: Vec<f64> = (-10..=10).map(|k| k as f64 * 0.1 * c.tau2).collect();
        let curve = centroid_curve_model(&c, c.tau2 / 1000.0, &centers, HeraldDirection::OnTwo).unwrap();
        let (slope, _, _) = centroid_slope(&curve);
        let expect = c.rho_t * c.tau1 / c.tau2;
        let ok = within(slope, expect, 1e-3);
        pass &= ok;
        parts.push(format!("{} {slope:.6} vs {expect:.6}", set.name));
    }
    report(5, pass, t0, &parts.join(", "));
    assert!(pass);
}

#[test]
fn criterion_6_fit_round_trip() {
    let t0 = Instant::now();
    let mut r = rng(601);
    let truths: Vec<TemporalCovariance> = (0..30)
        .map(|_| {
            TemporalCovariance::with_centroids(
                uniform(&mut r, -0.95, 0.95),
                log_uniform(&mut r, 2e-11, 2e-9),
                log_uniform(&mut r, 2e-11, 2e-9),
                uniform(&mut r, -2e-9, 2e-9),
                uniform(&mut r, -2e-9, 2e-9),
            )
            .unwrap()
        })
        .collect();
    let sets: Vec<_> = truths
        .iter()
        .enumerate()
        .map(|(i, c)| sample(c, &DetectorModel::ideal(), 100_000, 7000 + i as u64).unwrap())
        .collect();
    let mut pulls = Vec::new();
    for (f, c) in fit_batch(&sets, &FitConfig::default()).into_iter().zip(&truths) {
        let f = f.unwrap();
        let se = f.std_errors.unwrap();
        pulls.push((f.cov.rho_t - c.rho_t) / se.rho_t);
        pulls.push((f.cov.tau1 - c.tau1) / se.tau1);
        pulls.push((f.cov.tau2 - c.tau2) / se.tau2);
    }
    let worst = pulls.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    let inside = pulls.iter().filter(|p| p.abs() < 2.0).count() as f64 / pulls.len() as f64;
    let pass = worst < 4.0 && inside >= 0.95;
    report(
        6,
        pass,
        t0,
        &format!("30 instances: max |pull| {worst:.2} (< 4), {:.1}% within 2σ (>= 95%)", 100.0 * inside),
    );
    assert!(pass);
}

#[test]
fn criterion_7_oracle_equivalence() {
    let t0 = Instant::now();
    let mut r = rng(701);
    let mut worst: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    for _ in 0..10 {
        let c = TemporalCovariance::new(
            uniform(&mut r, -0.99, 0.99),
            log_uniform(&mut r, 1e-11, 2e-9),
            log_uniform(&mut r, 1e-11, 2e-9),
        )
        .unwrap();
        let center = uniform(&mut r, -2.0, 2.0) * c.tau2;
        let width = log_uniform(&mut r, 1e-3, 5.0) * c.tau2;
        let cd = ConditionalDensity::new(&c, center, width).unwrap();
        let m = cd.moments();
        let t1s: Vec<f64> = (-500..=500).map(|k| m.mean + k as f64 * 0.012 * m.std_dev).collect();
        let q = conditional_by_quadrature(&c, center, width, &t1s);
        for (t, q) in t1s.iter().zip(q) {
            worst = worst.max((cd.eval(*t) * c.tau1 - q).abs());
        }
        let f = |x: f64, y: f64| analytic::joint_density(x * c.tau1, y * c.tau2, &c) * c.tau1 * c.tau2;
        let total = common::quad::integrate2(&f, (-40.0, 40.0), (-40.0, 40.0), 1e-10);
        worst_norm = worst_norm.max((total - 1.0).abs());
    }
    let pass = worst <= 1e-6 && worst_norm <= 1e-6;
    report(
        7,
        pass,
        t0,
        &format!("conditional sup-norm {worst:.2e} (<= 1e-6), joint normalisation error {worst_norm:.2e} (<= 1e-6)"),
    );
    assert!(pass);
}

#[test]
fn criterion_8_rho_t_against_monte_carlo() {
    let t0 = Instant::now();
    let mut r = rng(801);
    let mut worst: f64 = 0.0;
    let mut sign_ok = true;
    for i in 0..50 {
        let sigma = log_uniform(&mut r, 1e11, 1e13);
        let kappa = log_uniform(&mut r, 0.2, 5.0) / (sigma * sigma);
        let tau_p = log_uniform(&mut r, 0.2, 5.0) * 2.0 / sigma;
        let length = log_uniform(&mut r, 1e2, 1e5);
        let src = SourceParams::pulsed(sigma, tau_p).unwrap();
        let link = LinkParams::new(-kappa / length, length).unwrap();
        let mc = dispersed_correlation(sigma, tau_p, link.beta * link.length, 1_000_000, 8000 + i);
        let rho = analytic::rho_t_of(&src, &link);
        worst = worst.max((mc.r - rho).abs() / mc.std_error);
        if (mc.r - rho).abs() > 3.0 * mc.std_error || (rho.abs() > 3.0 * mc.std_error && rho.signum() != mc.r.signum()) {
            sign_ok = false;
        }
    }
    // Zeros: exact whenever the product sigma * tau_p is exactly 2 in floating point.
    let mut zeros_exact = true;
    let mut bounded = 0.0f64;
    for _ in 0..1000 {
        let sigma = log_uniform(&mut r, 1e10, 1e14);
        let link = LinkParams::new(-log_uniform(&mut r, 1e-28, 1e-25), log_uniform(&mut r, 1.0, 1e5)).unwrap();
        let at_pump = SourceParams::pulsed(sigma, link.accumulated_gvd() * sigma).unwrap();
        zeros_exact &= analytic::rho_t_of(&at_pump, &link) == 0.0;
        let tau_p = 2.0 / sigma;
        let rho = analytic::rho_t_of(&SourceParams::pulsed(sigma, tau_p).unwrap(), &link);
        if sigma * tau_p == 2.0 {
            zeros_exact &= rho == 0.0;
        } else {
            bounded = bounded.max(rho.abs());
        }
    }
    let pass = sign_ok && worst <= 3.0 && zeros_exact && bounded <= 4.0 * f64::EPSILON;
    report(
        8,
        pass,
        t0,
        &format!(
            "50 draws x 1e6 pairs: max deviation {worst:.2} SE (<= 3); zeros exact: {zeros_exact}, \
             largest |rho_t| where sigma*tau_p rounds off 2: {bounded:.1e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_landscape_consistency() {
    let t0 = Instant::now();
    let link = fig4_link();
    let o = analytic::optimum(None, &link).unwrap();
    let (tg, sg) = reproduce::fig5_grids();
    let cells = |x: f64, opt: f64, g: &LogGrid| (x / opt).ln().abs() / g.step_ratio().ln();
    let mut pass = true;
    let mut parts = Vec::new();
    for which in [WidthKind::Tau1, WidthKind::Tau1h0] {
        let l = analytic::landscape(&tg, &sg, &link, which).unwrap();
        let (row, col) = l.argmin();
        let (ct, cs) = (cells(l.tau_p[col], o.tau_p_opt, &tg), cells(l.sigma[row], o.sigma_opt, &sg));
        pass &= ct <= 1.0 && cs <= 1.0;
        parts.push(format!("{} argmin {ct:.2}/{cs:.2} cells off", which.name()));
    }
    let flat = analytic::landscape(&tg, &sg, &link, WidthKind::Tau1hDt0).unwrap();
    let spread = (0..flat.sigma.len())
        .map(|k| {
            let r = flat.row(k);
            r.iter().cloned().fold(f64::MIN, f64::max) - r.iter().cloned().fold(f64::MAX, f64::min)
        })
        .fold(0.0, f64::max);
    pass &= spread == 0.0;
    parts.push(format!("tau1h_dt_0 row spread {spread:e}"));
    report(9, pass, t0, &parts.join(", "));
    assert!(pass);
}
