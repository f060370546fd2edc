//! Closed-form arrival-time statistics.
//!
//! Two groups of results live here. The first works on an observed
//! [`TemporalCovariance`]: the joint density of the two arrival times, the
//! density of photon 1 conditioned on photon 2 landing in a window, and the
//! zero-width limit of that conditional. The second works on source and link
//! parameters: the unconditional width `tau1`, the heralded width with known
//! emission time `tau1h_0`, the heralded width with unknown emission time
//! `tau1h_dt_0`, the temporal correlation `rho_t`, and the optima of these
//! widths over pump duration and phase-matching width.
//!
//! After dispersion the joint temporal intensity factorises in the sum and
//! difference times `t1 ± t2`. Their variances are
//!
//! ```text
//! V+ = tau_p² + 4 (βL)² / tau_p²     V- = 4 / sigma² + (βL)² sigma²
//! ```
//!
//! and every width follows from them: `tau1² = (V+ + V-) / 4`,
//! `tau1h_0² = V+ V- / (V+ + V-)`, `tau1h_dt_0² = V-`,
//! `rho_t = (V+ - V-) / (V+ + V-)`.
//!
//! Densities are the standard normalised bivariate normal; `tau1`, `tau2` are
//! standard deviations.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LinkParams, Pump, SourceParams, TemporalCovariance};
use crate::special::{std_normal_interval, truncated_std_normal_moments};

/// Joint density of arrival times, 1/s².
pub fn joint_density(t1: f64, t2: f64, cov: &TemporalCovariance) -> f64 {
    let x = (t1 - cov.mu1) / cov.tau1;
    let y = (t2 - cov.mu2) / cov.tau2;
    let r = cov.rho_t;
    let one_m_r2 = 1.0 - r * r;
    let q = (x * x + y * y - 2.0 * r * x * y) / one_m_r2;
    (-0.5 * q).exp() / (2.0 * PI * cov.tau1 * cov.tau2 * one_m_r2.sqrt())
}

/// Marginal density of photon 1, 1/s.
pub fn marginal_density(t1: f64, cov: &TemporalCovariance) -> f64 {
    let z = (t1 - cov.mu1) / cov.tau1;
    (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * cov.tau1)
}

/// Density of photon 1 given that photon 2 was detected in
/// `[center - width/2, center + width/2]`.
///
/// The numerator integral over the window is evaluated exactly by writing the
/// joint density as `N(t1) · N(t2 | t1)`; the normalisation is the window
/// probability of photon 2.
#[derive(Clone, Copy, Debug)]
pub struct ConditionalDensity {
    cov: TemporalCovariance,
    lo: f64,
    hi: f64,
    slope: f64,
    spread: f64,
    norm: f64,
}

impl ConditionalDensity {
    /// `width` may be `f64::INFINITY` for no timing information on photon 2.
    pub fn new(cov: &TemporalCovariance, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::invalid(format!(
                "window width must be positive, got {width}"
            )));
        }
        if !center.is_finite() {
            return Err(Error::invalid("window center must be finite"));
        }
        let (lo, hi) = if width.is_infinite() {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else {
            (center - 0.5 * width, center + 0.5 * width)
        };
        let norm = std_normal_interval((lo - cov.mu2) / cov.tau2, (hi - cov.mu2) / cov.tau2);
        if !(norm > 0.0) {
            return Err(Error::Degenerate(format!(
                "window [{lo:e}, {hi:e}] s carries no probability for photon 2"
            )));
        }
        Ok(Self {
            cov: *cov,
            lo,
            hi,
            slope: cov.rho_t * cov.tau2 / cov.tau1,
            spread: cov.tau2 * (1.0 - cov.rho_t * cov.rho_t).sqrt(),
            norm,
        })
    }

    pub fn eval(&self, t1: f64) -> f64 {
        let m = self.cov.mu2 + self.slope * (t1 - self.cov.mu1);
        let inside = std_normal_interval((self.lo - m) / self.spread, (self.hi - m) / self.spread);
        marginal_density(t1, &self.cov) * inside / self.norm
    }

    /// Mean and standard deviation of photon 1 under this conditional.
    pub fn moments(&self) -> Moments {
        let c = &self.cov;
        let (m2, v2) = if self.lo.is_infinite() {
            (0.0, 1.0)
        } else {
            truncated_std_normal_moments((self.lo - c.mu2) / c.tau2, (self.hi - c.mu2) / c.tau2)
        };
        // t1 = mu1 + a (t2 - mu2) + e, with e independent of t2.
        let a = c.rho_t * c.tau1 / c.tau2;
        let residual = c.tau1 * c.tau1 * (1.0 - c.rho_t * c.rho_t);
        let var = a * a * v2 * c.tau2 * c.tau2 + residual;
        Moments {
            mean: c.mu1 + a * m2 * c.tau2,
            std_dev: var.sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub std_dev: f64,
}

/// Windowed conditional density of photon 1, 1/s.
pub fn conditional_density(
    t1: f64,
    center: f64,
    width: f64,
    cov: &TemporalCovariance,
) -> Result<f64> {
    Ok(ConditionalDensity::new(cov, center, width)?.eval(t1))
}

/// Zero-window limit of [`conditional_density`]: a Gaussian with mean
/// `mu1 + rho_t (tau1/tau2) (center - mu2)` and width `tau1 sqrt(1 - rho_t²)`.
pub fn conditional_limit_density(t1: f64, center: f64, cov: &TemporalCovariance) -> f64 {
    let m = conditional_limit_mean(center, cov);
    let s = cov.tau1 * narrowing_ratio_limit(cov);
    let z = (t1 - m) / s;
    (-0.5 * z * z).exp() / ((2.0 * PI).sqrt() * s)
}

pub fn conditional_limit_mean(center: f64, cov: &TemporalCovariance) -> f64 {
    cov.mu1 + cov.rho_t * cov.tau1 / cov.tau2 * (center - cov.mu2)
}

/// `sqrt(1 - rho_t²)`, the smallest achievable heralded-to-unheralded width ratio.
pub fn narrowing_ratio_limit(cov: &TemporalCovariance) -> f64 {
    (1.0 - cov.rho_t * cov.rho_t).sqrt()
}

/// Variances of `t1 + t2` and `t1 - t2` after propagation. `None` for a CW pump,
/// whose sum-time variance is unbounded.
fn sum_difference_variances(src: &SourceParams, link: &LinkParams) -> (Option<f64>, f64) {
    let bl = link.accumulated_gvd();
    let s = src.sigma;
    let v_minus = 4.0 / (s * s) + bl * bl * s * s;
    let v_plus = match src.pump {
        Pump::Pulsed { tau_p } => Some(tau_p * tau_p + 4.0 * bl * bl / (tau_p * tau_p)),
        Pump::ContinuousWave => None,
    };
    (v_plus, v_minus)
}

/// Unconditional temporal width of either photon, s.
pub fn tau1(src: &SourceParams, link: &LinkParams) -> Result<f64> {
    match sum_difference_variances(src, link) {
        (Some(vp), vm) => Ok((0.25 * (vp + vm)).sqrt()),
        (None, _) => Err(Error::Divergent(
            "the unheralded width is unbounded for a CW pump",
        )),
    }
}

/// Heralded width when photon 2's arrival and the emission time are both known, s.
///
/// For a CW pump this reduces to [`tau1h_dt_0`].
pub fn tau1h_0(src: &SourceParams, link: &LinkParams) -> f64 {
    match sum_difference_variances(src, link) {
        (Some(vp), vm) => (vp * vm / (vp + vm)).sqrt(),
        (None, vm) => vm.sqrt(),
    }
}

/// Heralded width when the emission time is unknown; independent of the pump, s.
pub fn tau1h_dt_0(src: &SourceParams, link: &LinkParams) -> f64 {
    sum_difference_variances(src, link).1.sqrt()
}

/// Temporal correlation coefficient after propagation.
///
/// Zero exactly at `tau_p = 2/sigma` and `tau_p = |β| L sigma`; tends to 1 for a
/// CW pump.
pub fn rho_t_of(src: &SourceParams, link: &LinkParams) -> f64 {
    let Some(tau_p) = src.tau_p() else {
        return 1.0;
    };
    let s = src.sigma;
    let bl = link.accumulated_gvd();
    // Factored form keeps the two zeros exact.
    let a = s * tau_p;
    let num = (a - 2.0) * (a + 2.0) * (tau_p - bl * s) * (tau_p + bl * s);
    let den = a * a * tau_p * tau_p + (bl * bl * s * s * s * s + 4.0) * tau_p * tau_p + 4.0 * bl * bl * s * s;
    num / den
}

/// Observable statistics implied by a source and a symmetric link.
pub fn temporal_covariance(src: &SourceParams, link: &LinkParams) -> Result<TemporalCovariance> {
    let w = tau1(src, link)?;
    let rho = rho_t_of(src, link);
    TemporalCovariance::new(rho, w, w)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthReport {
    pub tau1: f64,
    pub tau1h_0: f64,
    pub tau1h_dt_0: f64,
    /// `tau1h_0 / tau1`.
    pub ratio: f64,
}

pub fn widths(src: &SourceParams, link: &LinkParams) -> Result<WidthReport> {
    let t1 = tau1(src, link)?;
    let th = tau1h_0(src, link);
    Ok(WidthReport {
        tau1: t1,
        tau1h_0: th,
        tau1h_dt_0: tau1h_dt_0(src, link),
        ratio: th / t1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimumReport {
    /// Phase-matching width the `*_min` and `rho_opt` entries refer to.
    pub sigma: f64,
    pub tau_p_opt: f64,
    pub sigma_opt: f64,
    /// Spectral correlation at `(tau_p_opt, sigma)`.
    pub rho_opt: f64,
    pub tau1_min: f64,
    pub tau1h_min: f64,
    /// `tau1h_dt_0` at `sigma`.
    pub tau1h_dt: f64,
    pub tau1_abs: f64,
    pub tau1h_abs: f64,
    pub tau1h_dt_abs: f64,
}

/// Pump duration and phase-matching width minimising the temporal widths.
///
/// With `sigma_fixed` the `*_min` entries are the minima over `tau_p` at that
/// width; without it they coincide with the absolute minima.
pub fn optimum(sigma_fixed: Option<f64>, link: &LinkParams) -> Result<OptimumReport> {
    let k = link.accumulated_gvd();
    if !(k > 0.0) {
        return Err(Error::Degenerate(
            "no dispersion (beta L = 0): width optimisation is degenerate".into(),
        ));
    }
    if let Some(s) = sigma_fixed {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::invalid(format!("sigma must be positive, got {s}")));
        }
    }
    let tau_p_opt = (2.0 * k).sqrt();
    let sigma_opt = (2.0 / k).sqrt();
    let s = sigma_fixed.unwrap_or(sigma_opt);
    let ks2 = k * s * s;
    Ok(OptimumReport {
        sigma: s,
        tau_p_opt,
        sigma_opt,
        rho_opt: (2.0 - ks2) / (2.0 + ks2),
        tau1_min: (ks2 + 2.0) / (2.0 * s),
        tau1h_min: 2.0 * (k * (ks2 * ks2 + 4.0)).sqrt() / (ks2 + 2.0),
        tau1h_dt: (ks2 * ks2 + 4.0).sqrt() / s,
        tau1_abs: tau_p_opt,
        tau1h_abs: tau_p_opt,
        tau1h_dt_abs: 2.0 * k.sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthKind {
    Tau1,
    Tau1h0,
    Tau1hDt0,
}

impl WidthKind {
    pub fn name(self) -> &'static str {
        match self {
            WidthKind::Tau1 => "tau1",
            WidthKind::Tau1h0 => "tau1h_0",
            WidthKind::Tau1hDt0 => "tau1h_dt_0",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "tau1" => Some(WidthKind::Tau1),
            "tau1h_0" | "tau1h0" => Some(WidthKind::Tau1h0),
            "tau1h_dt_0" | "tau1hdt0" => Some(WidthKind::Tau1hDt0),
            _ => None,
        }
    }

    pub fn eval(self, src: &SourceParams, link: &LinkParams) -> Result<f64> {
        match self {
            WidthKind::Tau1 => tau1(src, link),
            WidthKind::Tau1h0 => Ok(tau1h_0(src, link)),
            WidthKind::Tau1hDt0 => Ok(tau1h_dt_0(src, link)),
        }
    }
}

/// Geometrically spaced points from `lo` to `hi` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl LogGrid {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::invalid(format!(
                "grid bounds must satisfy 0 < lo < hi, got [{lo:e}, {hi:e}]"
            )));
        }
        if points < 2 {
            return Err(Error::invalid("grid needs at least two points"));
        }
        Ok(Self { lo, hi, points })
    }

    pub fn values(&self) -> Vec<f64> {
        let (a, b) = (self.lo.ln(), self.hi.ln());
        let n = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| (a + (b - a) * i as f64 / n).exp())
            .collect()
    }

    /// Ratio between neighbouring points.
    pub fn step_ratio(&self) -> f64 {
        (self.hi / self.lo).powf(1.0 / (self.points - 1) as f64)
    }
}

/// Width evaluated on a `(sigma, tau_p)` grid. Rows follow `sigma`, columns `tau_p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub which: WidthKind,
    pub tau_p: Vec<f64>,
    pub sigma: Vec<f64>,
    pub values: Vec<f64>,
}

impl Landscape {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.tau_p.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.tau_p.len();
        &self.values[row * n..(row + 1) * n]
    }

    /// `(row, col)` of the smallest entry.
    pub fn argmin(&self) -> (usize, usize) {
        let (idx, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, &v)| if v < best.1 { (i, v) } else { best });
        (idx / self.tau_p.len(), idx % self.tau_p.len())
    }
}

pub fn landscape(
    tau_p: &LogGrid,
    sigma: &LogGrid,
    link: &LinkParams,
    which: WidthKind,
) -> Result<Landscape> {
    let taus = tau_p.values();
    let sigmas = sigma.values();
    let row = |&s: &f64| -> Vec<f64> {
        taus.iter()
            .map(|&t| {
                let src = SourceParams {
                    sigma: s,
                    pump: Pump::Pulsed { tau_p: t },
                };
                // Pulsed sources never hit the divergent branch.
                which.eval(&src, link).unwrap_or(f64::INFINITY)
            })
            .collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = sigmas.par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = sigmas.iter().map(row).collect();
    Ok(Landscape {
        which,
        values: rows.into_iter().flatten().collect(),
        tau_p: taus,
        sigma: sigmas,
    })
}

/// `(tau_p, sigma)` points of constant single-photon bandwidth `sigma0`,
/// one per requested spectral correlation.
pub fn constant_bandwidth_locus(sigma0: f64, rhos: &[f64]) -> Result<Vec<(f64, f64)>> {
    rhos.iter()
        .map(|&rho| {
            let p = crate::model::from_rho_form(&crate::model::SourceParamsRho::new(sigma0, rho)?)?;
            Ok((p.tau_p().expect("pulsed"), p.sigma))
        })
        .collect()
}

/// Gaussian CDF of photon 1's marginal, used by tests and the sampler checks.
pub fn marginal_cdf(t1: f64, cov: &TemporalCovariance) -> f64 {
    0.5 * libm::erfc(-(t1 - cov.mu1) / cov.tau1 * FRAC_1_SQRT_2)
}
