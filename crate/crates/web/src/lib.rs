//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers in SI units and returns a flat
//! `Float64Array`; the layout is given on each function.

use pairtime::analytic::{self, LogGrid, WidthKind};
use pairtime::herald::{self, HeraldDirection};
use pairtime::{LinkParams, SourceParams, TemporalCovariance};
use wasm_bindgen::prelude::*;

fn js(r: pairtime::Result<Vec<f64>>) -> Result<Vec<f64>, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

fn linear(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn direction(on_one: bool) -> HeraldDirection {
    if on_one {
        HeraldDirection::OnOne
    } else {
        HeraldDirection::OnTwo
    }
}

fn widths_vs_tau_p(sigma: f64, beta: f64, length: f64, lo: f64, hi: f64, points: usize) -> pairtime::Result<Vec<f64>> {
    let link = LinkParams::new(beta, length)?;
    let mut out = Vec::with_capacity(4 * points);
    for t in LogGrid::new(lo, hi, points)?.values() {
        let w = analytic::widths(&SourceParams::pulsed(sigma, t)?, &link)?;
        out.extend([t, w.tau1, w.tau1h_0, w.tau1h_dt_0]);
    }
    Ok(out)
}

/// Rows of `[tau_p, tau1, tau1h_0, tau1h_dt_0]` on a log grid of pump durations.
#[wasm_bindgen]
pub fn width_curves(sigma: f64, beta: f64, length: f64, tau_lo: f64, tau_hi: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(widths_vs_tau_p(sigma, beta, length, tau_lo, tau_hi, points))
}

fn optimum_values(sigma: f64, beta: f64, length: f64) -> pairtime::Result<Vec<f64>> {
    let o = analytic::optimum(Some(sigma), &LinkParams::new(beta, length)?)?;
    Ok(vec![o.tau_p_opt, o.sigma_opt, o.rho_opt, o.tau1_min, o.tau1h_min, o.tau1h_dt, o.tau1h_dt_abs])
}

/// `[tau_p_opt, sigma_opt, rho_opt, tau1_min, tau1h_min, tau1h_dt, tau1h_dt_abs]`,
/// the `*_min`, `rho_opt` and `tau1h_dt` entries taken at `sigma`.
#[wasm_bindgen]
pub fn optimum(sigma: f64, beta: f64, length: f64) -> Result<Vec<f64>, JsError> {
    js(optimum_values(sigma, beta, length))
}

#[allow(clippy::too_many_arguments)]
fn landscape_values(
    which: &str,
    beta: f64,
    length: f64,
    tau_lo: f64,
    tau_hi: f64,
    sigma_lo: f64,
    sigma_hi: f64,
    points: usize,
) -> pairtime::Result<Vec<f64>> {
    let which = WidthKind::parse(which)
        .ok_or_else(|| pairtime::Error::InvalidParameter(format!("unknown width {which:?}")))?;
    let l = analytic::landscape(
        &LogGrid::new(tau_lo, tau_hi, points)?,
        &LogGrid::new(sigma_lo, sigma_hi, points)?,
        &LinkParams::new(beta, length)?,
        which,
    )?;
    Ok(l.values.iter().map(|v| v.log10()).collect())
}

/// log10 of a width on a square `points x points` grid, rows along `sigma`,
/// columns along `tau_p`. `which` is `tau1`, `tau1h_0` or `tau1h_dt_0`.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn landscape(
    which: &str,
    beta: f64,
    length: f64,
    tau_lo: f64,
    tau_hi: f64,
    sigma_lo: f64,
    sigma_hi: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    js(landscape_values(which, beta, length, tau_lo, tau_hi, sigma_lo, sigma_hi, points))
}

#[allow(clippy::too_many_arguments)]
fn narrowing_values(
    rho_t: f64,
    tau1: f64,
    tau2: f64,
    center: f64,
    dt_lo: f64,
    dt_hi: f64,
    points: usize,
    on_one: bool,
) -> pairtime::Result<Vec<f64>> {
    let cov = TemporalCovariance::new(rho_t, tau1, tau2)?;
    let dts = LogGrid::new(dt_lo, dt_hi, points)?.values();
    let c = herald::narrowing_curve_model(&cov, center, &dts, direction(on_one))?;
    let mut out = vec![c.asymptote];
    for p in c.points {
        out.extend([p.dt, p.ratio]);
    }
    Ok(out)
}

/// `[asymptote, dt_0, ratio_0, dt_1, ratio_1, ...]`: heralded width over the
/// unheralded width for windows of width `dt` centered at `center`.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn narrowing(
    rho_t: f64,
    tau1: f64,
    tau2: f64,
    center: f64,
    dt_lo: f64,
    dt_hi: f64,
    points: usize,
    on_one: bool,
) -> Result<Vec<f64>, JsError> {
    js(narrowing_values(rho_t, tau1, tau2, center, dt_lo, dt_hi, points, on_one))
}

#[allow(clippy::too_many_arguments)]
fn centroid_values(
    rho_t: f64,
    tau1: f64,
    tau2: f64,
    width: f64,
    lo: f64,
    hi: f64,
    points: usize,
    on_one: bool,
) -> pairtime::Result<Vec<f64>> {
    let cov = TemporalCovariance::new(rho_t, tau1, tau2)?;
    let c = herald::centroid_curve_model(&cov, width, &linear(lo, hi, points), direction(on_one))?;
    Ok(c.iter().flat_map(|p| [p.center, p.mean]).collect())
}

/// `[center_0, mean_0, center_1, mean_1, ...]`: heralded mean arrival time
/// against the window center.
#[allow(clippy::too_many_arguments)]
#[wasm_bindgen]
pub fn centroid(
    rho_t: f64,
    tau1: f64,
    tau2: f64,
    width: f64,
    lo: f64,
    hi: f64,
    points: usize,
    on_one: bool,
) -> Result<Vec<f64>, JsError> {
    js(centroid_values(rho_t, tau1, tau2, width, lo, hi, points, on_one))
}
