//! Recovery of the arrival-time statistics from coincidence events.
//!
//! Two estimators are available:
//!
//! * **Histogram least squares** (default). Events are binned on a 2D grid
//!   over a percentile box and the bin-integrated bivariate normal plus a
//!   constant background is fitted by Levenberg–Marquardt. Widths are fitted
//!   on a log scale and the correlation through `atanh`, so iterates stay in
//!   the valid domain.
//! * **Maximum likelihood** on individual events for a Gaussian-plus-uniform
//!   mixture, solved by expectation–maximisation.
//!
//! All fitting happens in centred, rescaled coordinates so that a common time
//! translation of the data leaves the correlation and widths untouched.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lm::{self, LmConfig};
use crate::model::TemporalCovariance;
use crate::sampler::{Event, EventSet};
use crate::stats::{pair_moments, quantile_sorted};

/// Likelihood-ratio threshold below which the signal is declared absent:
/// the 99.9% point of a χ² distribution with 6 degrees of freedom.
const NO_SIGNAL_DEVIANCE: f64 = 22.458;
const MIN_EVENTS: usize = 100;
const CHI2_MIN_EXPECTED: f64 = 5.0;
const MAX_ABS_RHO_GUESS: f64 = 0.999;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum RangePolicy {
    /// Box spanned by the given lower/upper quantiles of each coordinate.
    Quantile { lower: f64, upper: f64 },
    /// Fixed box in seconds.
    Explicit { t1: (f64, f64), t2: (f64, f64) },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Loss {
    HistogramLeastSquares,
    MaximumLikelihood,
}

/// Variance assigned to each histogram bin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinWeighting {
    /// `max(count, 1)`: Neyman's χ².
    Observed,
    /// Model expectation from the previous iterate. Iterating to a fixed point
    /// gives the Poisson maximum-likelihood estimate.
    Model,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub bins1: usize,
    pub bins2: usize,
    pub range: RangePolicy,
    pub loss: Loss,
    pub weighting: BinWeighting,
    pub max_iterations: usize,
    /// Relative parameter change that counts as converged.
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            bins1: 64,
            bins2: 64,
            range: RangePolicy::Quantile {
                lower: 0.005,
                upper: 0.995,
            },
            loss: Loss::HistogramLeastSquares,
            weighting: BinWeighting::Model,
            max_iterations: 500,
            tolerance: 1e-10,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.bins1 < 8 || self.bins2 < 8 {
            problems.push(format!(
                "histogram needs at least 8 bins per axis, got {}x{}",
                self.bins1, self.bins2
            ));
        }
        if !(self.tolerance > 0.0) {
            problems.push(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.max_iterations == 0 {
            problems.push("max_iterations must be at least 1".into());
        }
        match self.range {
            RangePolicy::Quantile { lower, upper } => {
                if !(0.0 <= lower && lower < upper && upper <= 1.0) {
                    problems.push(format!("quantile range must satisfy 0 <= lower < upper <= 1, got ({lower}, {upper})"));
                }
            }
            RangePolicy::Explicit { t1, t2 } => {
                if !(t1.0 < t1.1 && t2.0 < t2.1) {
                    problems.push("explicit range bounds must be increasing".into());
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

/// Standard errors of every fitted quantity, in the units of [`FitResult`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamErrors {
    pub rho_t: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub amplitude: f64,
    pub background: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub cov: TemporalCovariance,
    /// Fraction of the fitted events attributed to the Gaussian.
    pub amplitude: f64,
    /// Fraction of the fitted events attributed to the uniform background.
    /// Unconstrained, so it can come out slightly negative when there is none.
    pub background_level: f64,
    /// `None` when the curvature matrix at the optimum is singular.
    pub std_errors: Option<ParamErrors>,
    /// Pearson χ² per degree of freedom of the histogram fit, over bins
    /// expecting at least five counts.
    pub reduced_chi_squared: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// No significant Gaussian component in the data.
    pub degenerate_signal: bool,
    pub loss: Loss,
    pub events_used: usize,
}

/// Method-of-moments starting point.
pub fn initial_guess(events: &EventSet) -> Result<TemporalCovariance> {
    if events.len() < 10 {
        return Err(Error::TooFewEvents {
            needed: 10,
            got: events.len(),
        });
    }
    let m = pair_moments(&events.t1(), &events.t2());
    if !(m.std1 > 0.0 && m.std2 > 0.0) {
        return Err(Error::Degenerate(
            "events have zero variance in at least one coordinate".into(),
        ));
    }
    let rho = if m.correlation.is_finite() {
        m.correlation.clamp(-MAX_ABS_RHO_GUESS, MAX_ABS_RHO_GUESS)
    } else {
        0.0
    };
    TemporalCovariance::with_centroids(rho, m.std1, m.std2, m.mean1, m.mean2)
}

pub fn fit(events: &EventSet, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    if events.len() < MIN_EVENTS {
        return Err(Error::TooFewEvents {
            needed: MIN_EVENTS,
            got: events.len(),
        });
    }
    if events.events.iter().any(|e| !(e.t1.is_finite() && e.t2.is_finite())) {
        return Err(Error::NonFinite("event times".into()));
    }
    initial_guess(events)?;
    let frame = Frame::new(events, cfg)?;
    match cfg.loss {
        Loss::HistogramLeastSquares => fit_histogram(events, &frame, cfg),
        Loss::MaximumLikelihood => fit_likelihood(events, &frame, cfg),
    }
}

/// Fits several independent event sets, in parallel when available.
pub fn fit_batch(sets: &[EventSet], cfg: &FitConfig) -> Vec<Result<FitResult>> {
    crate::par::map(sets, |s| fit(s, cfg))
}

/// Centred, rescaled coordinates and the fitting box.
#[derive(Clone, Copy, Debug)]
struct Frame {
    center: [f64; 2],
    scale: [f64; 2],
}

impl Frame {
    fn new(events: &EventSet, cfg: &FitConfig) -> Result<Self> {
        let (b1, b2) = match cfg.range {
            RangePolicy::Explicit { t1, t2 } => (t1, t2),
            RangePolicy::Quantile { lower, upper } => {
                let q = |mut v: Vec<f64>| {
                    v.sort_by(f64::total_cmp);
                    (quantile_sorted(&v, lower), quantile_sorted(&v, upper))
                };
                (q(events.t1()), q(events.t2()))
            }
        };
        if !(b1.1 > b1.0 && b2.1 > b2.0) {
            return Err(Error::Degenerate(
                "fit box has zero extent; events are (nearly) identical".into(),
            ));
        }
        Ok(Self {
            center: [0.5 * (b1.0 + b1.1), 0.5 * (b2.0 + b2.1)],
            scale: [0.5 * (b1.1 - b1.0), 0.5 * (b2.1 - b2.0)],
        })
    }

    fn to_unit(&self, e: &Event) -> [f64; 2] {
        [
            (e.t1 - self.center[0]) / self.scale[0],
            (e.t2 - self.center[1]) / self.scale[1],
        ]
    }

    fn to_covariance(&self, g: &Gaussian) -> Result<TemporalCovariance> {
        TemporalCovariance::with_centroids(
            g.rho,
            g.s1 * self.scale[0],
            g.s2 * self.scale[1],
            self.center[0] + g.m1 * self.scale[0],
            self.center[1] + g.m2 * self.scale[1],
        )
    }
}

/// Bivariate normal in frame units.
#[derive(Clone, Copy, Debug)]
struct Gaussian {
    m1: f64,
    m2: f64,
    s1: f64,
    s2: f64,
    rho: f64,
}

impl Gaussian {
    fn density(&self, x: f64, y: f64) -> f64 {
        let a = (x - self.m1) / self.s1;
        let b = (y - self.m2) / self.s2;
        let one_m = 1.0 - self.rho * self.rho;
        let q = (a * a + b * b - 2.0 * self.rho * a * b) / one_m;
        (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * self.s1 * self.s2 * one_m.sqrt())
    }
}

// Three-point Gauss–Legendre rule on [-1, 1].
const GL3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

struct Histogram {
    nb1: usize,
    nb2: usize,
    counts: Vec<f64>,
    total: f64,
    /// Quadrature abscissae (frame units) and weights per column / row.
    nodes1: Vec<[(f64, f64); 3]>,
    nodes2: Vec<[(f64, f64); 3]>,
}

impl Histogram {
    fn build(events: &EventSet, frame: &Frame, nb1: usize, nb2: usize) -> Self {
        let mut counts = vec![0.0; nb1 * nb2];
        let mut total = 0.0;
        for e in &events.events {
            let [x, y] = frame.to_unit(e);
            if !((-1.0..=1.0).contains(&x) && (-1.0..=1.0).contains(&y)) {
                continue;
            }
            let i = (((x + 1.0) * 0.5 * nb1 as f64) as usize).min(nb1 - 1);
            let j = (((y + 1.0) * 0.5 * nb2 as f64) as usize).min(nb2 - 1);
            counts[i * nb2 + j] += 1.0;
            total += 1.0;
        }
        let nodes = |nb: usize| -> Vec<[(f64, f64); 3]> {
            let w = 2.0 / nb as f64;
            (0..nb)
                .map(|i| {
                    let mid = -1.0 + (i as f64 + 0.5) * w;
                    GL3.map(|(x, wt)| (mid + 0.5 * w * x, 0.5 * w * wt))
                })
                .collect()
        };
        Self {
            nb1,
            nb2,
            counts,
            total,
            nodes1: nodes(nb1),
            nodes2: nodes(nb2),
        }
    }

    fn bins(&self) -> usize {
        self.nb1 * self.nb2
    }

    /// Expected counts for the packed parameter vector, or `None` outside the
    /// admissible domain.
    fn expected(&self, p: &[f64], out: &mut [f64]) -> bool {
        let Some(g) = unpack(p) else {
            return false;
        };
        let (amp, bkg) = (p[5], p[6]);
        let mut mass = 0.0;
        for i in 0..self.nb1 {
            for j in 0..self.nb2 {
                let mut v = 0.0;
                for &(x, wx) in &self.nodes1[i] {
                    for &(y, wy) in &self.nodes2[j] {
                        v += wx * wy * g.density(x, y);
                    }
                }
                out[i * self.nb2 + j] = v;
                mass += v;
            }
        }
        if !(mass > 1e-12) {
            return false;
        }
        let uniform = 1.0 / self.bins() as f64;
        for v in out.iter_mut() {
            *v = self.total * (amp * *v / mass + bkg * uniform);
        }
        true
    }
}

/// `[m1, m2, ln s1, ln s2, atanh rho, amplitude, background]` → Gaussian.
fn unpack(p: &[f64]) -> Option<Gaussian> {
    let (ls1, ls2) = (p[2], p[3]);
    if !(-12.0..=6.0).contains(&ls1) || !(-12.0..=6.0).contains(&ls2) || p[4].abs() > 8.0 {
        return None;
    }
    if p[0].abs() > 50.0 || p[1].abs() > 50.0 {
        return None;
    }
    Some(Gaussian {
        m1: p[0],
        m2: p[1],
        s1: ls1.exp(),
        s2: ls2.exp(),
        rho: p[4].tanh(),
    })
}

fn poisson_deviance(counts: &[f64], expected: &[f64]) -> f64 {
    2.0 * counts
        .iter()
        .zip(expected)
        .map(|(&n, &m)| {
            let m = m.max(1e-300);
            if n > 0.0 {
                m - n + n * (n / m).ln()
            } else {
                m
            }
        })
        .sum::<f64>()
}

fn fit_histogram(events: &EventSet, frame: &Frame, cfg: &FitConfig) -> Result<FitResult> {
    let hist = Histogram::build(events, frame, cfg.bins1, cfg.bins2);
    if hist.total < MIN_EVENTS as f64 {
        return Err(Error::TooFewEvents {
            needed: MIN_EVENTS,
            got: hist.total as usize,
        });
    }
    let guess = initial_guess(events)?;
    let mut p = vec![
        (guess.mu1 - frame.center[0]) / frame.scale[0],
        (guess.mu2 - frame.center[1]) / frame.scale[1],
        (guess.tau1 / frame.scale[0]).ln(),
        (guess.tau2 / frame.scale[1]).ln(),
        guess.rho_t.atanh(),
        0.95,
        0.05,
    ];
    let lm_cfg = LmConfig {
        max_iterations: cfg.max_iterations,
        xtol: cfg.tolerance,
        ..LmConfig::default()
    };
    let nbins = hist.bins();
    let mut model = vec![0.0; nbins];
    let mut variance: Vec<f64> = match cfg.weighting {
        BinWeighting::Observed => hist.counts.iter().map(|&n| n.max(1.0)).collect(),
        BinWeighting::Model => hist.counts.iter().map(|&n| n.max(1.0)).collect(),
    };

    let mut iterations = 0;
    let mut converged = false;
    let mut outcome = None;
    let outer_rounds = match cfg.weighting {
        BinWeighting::Observed => 1,
        BinWeighting::Model => 30,
    };
    for round in 0..outer_rounds {
        let sigma: Vec<f64> = variance.iter().map(|v| v.sqrt()).collect();
        let mut scratch = vec![0.0; nbins];
        let out = lm::minimize(
            |q, r| {
                if hist.expected(q, &mut scratch) {
                    for k in 0..r.len() {
                        r[k] = (hist.counts[k] - scratch[k]) / sigma[k];
                    }
                } else {
                    r.fill(f64::NAN);
                }
            },
            &p,
            nbins,
            &lm_cfg,
        );
        iterations += out.iterations;
        let moved = out
            .params
            .iter()
            .zip(&p)
            .all(|(a, b)| (a - b).abs() <= cfg.tolerance.max(1e-12) * 1e2 * (b.abs() + 1e-3));
        p = out.params.clone();
        let lm_ok = out.converged;
        outcome = Some(out);
        if cfg.weighting == BinWeighting::Observed {
            converged = lm_ok;
            break;
        }
        hist.expected(&p, &mut model);
        variance = model.iter().map(|&m| m.max(1e-2)).collect();
        if round > 0 && moved && lm_ok {
            converged = true;
            break;
        }
    }
    let outcome = outcome.expect("at least one round");
    hist.expected(&p, &mut model);

    let g = unpack(&p).ok_or_else(|| Error::Degenerate("fit left the admissible domain".into()))?;
    let cov = frame.to_covariance(&g)?;
    let (chi2, populated) = hist
        .counts
        .iter()
        .zip(&model)
        .filter(|(_, &m)| m >= CHI2_MIN_EXPECTED)
        .fold((0.0, 0usize), |(c, k), (n, m)| (c + (n - m) * (n - m) / m, k + 1));
    let reduced_chi_squared = (populated > 7).then(|| chi2 / (populated - 7) as f64);

    let std_errors = outcome.covariance().map(|c| {
        let se = |k: usize| c[(k, k)].sqrt();
        ParamErrors {
            mu1: frame.scale[0] * se(0),
            mu2: frame.scale[1] * se(1),
            tau1: cov.tau1 * se(2),
            tau2: cov.tau2 * se(3),
            rho_t: (1.0 - cov.rho_t * cov.rho_t) * se(4),
            amplitude: se(5),
            background: se(6),
        }
    });

    // Compare against a background-only model to detect an absent signal.
    let background_only = vec![hist.total / nbins as f64; nbins];
    let gain = poisson_deviance(&hist.counts, &background_only) - poisson_deviance(&hist.counts, &model);
    let (amplitude, background_level, degenerate) = if gain < NO_SIGNAL_DEVIANCE {
        (0.0, 1.0, true)
    } else {
        (p[5], p[6], false)
    };

    Ok(FitResult {
        cov,
        amplitude,
        background_level,
        std_errors: if degenerate { None } else { std_errors },
        reduced_chi_squared,
        converged,
        iterations,
        degenerate_signal: degenerate,
        loss: Loss::HistogramLeastSquares,
        events_used: hist.total as usize,
    })
}

/// Per-event data in frame units plus the background support area.
struct Points {
    xy: Vec<[f64; 2]>,
    uniform_density: f64,
}

impl Points {
    fn new(events: &EventSet, frame: &Frame) -> Self {
        let xy: Vec<[f64; 2]> = events.events.iter().map(|e| frame.to_unit(e)).collect();
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &xy {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Self {
            uniform_density: 1.0 / ((hi[0] - lo[0]) * (hi[1] - lo[1])),
            xy,
        }
    }

    fn log_likelihood(&self, g: &Gaussian, f: f64) -> f64 {
        self.xy
            .iter()
            .map(|p| ((1.0 - f) * g.density(p[0], p[1]) + f * self.uniform_density).ln())
            .sum()
    }
}

fn weighted_gaussian(xy: &[[f64; 2]], w: Option<&[f64]>) -> Gaussian {
    let weight = |i: usize| w.map_or(1.0, |w| w[i]);
    let total: f64 = (0..xy.len()).map(weight).sum();
    let (mut m1, mut m2) = (0.0, 0.0);
    for (i, p) in xy.iter().enumerate() {
        m1 += weight(i) * p[0];
        m2 += weight(i) * p[1];
    }
    m1 /= total;
    m2 /= total;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (i, p) in xy.iter().enumerate() {
        let (dx, dy) = (p[0] - m1, p[1] - m2);
        let wi = weight(i);
        sxx += wi * dx * dx;
        syy += wi * dy * dy;
        sxy += wi * dx * dy;
    }
    Gaussian {
        m1,
        m2,
        s1: (sxx / total).sqrt(),
        s2: (syy / total).sqrt(),
        rho: (sxy / (sxx * syy).sqrt()).clamp(-0.999_999, 0.999_999),
    }
}

fn fit_likelihood(events: &EventSet, frame: &Frame, cfg: &FitConfig) -> Result<FitResult> {
    let pts = Points::new(events, frame);
    let u = pts.uniform_density;
    let mut g = weighted_gaussian(&pts.xy, None);

    // If the likelihood does not increase when a little background is mixed
    // into the pure-Gaussian estimate, the maximum sits on the f = 0 boundary.
    let score_at_zero: f64 = pts.xy.iter().map(|p| u / g.density(p[0], p[1]) - 1.0).sum();
    let mut f = 0.0;
    let mut iterations = 0;
    let mut converged = true;
    if score_at_zero > 0.0 {
        converged = false;
        f = 0.05;
        let mut resp = vec![0.0; pts.xy.len()];
        let max_iter = cfg.max_iterations.max(1) * 10;
        while iterations < max_iter {
            iterations += 1;
            for (r, p) in resp.iter_mut().zip(&pts.xy) {
                let s = (1.0 - f) * g.density(p[0], p[1]);
                *r = s / (s + f * u);
            }
            let signal: f64 = resp.iter().sum();
            let f_new = 1.0 - signal / pts.xy.len() as f64;
            let g_new = weighted_gaussian(&pts.xy, Some(&resp));
            let change = [
                (g_new.m1 - g.m1).abs(),
                (g_new.m2 - g.m2).abs(),
                (g_new.s1 / g.s1 - 1.0).abs(),
                (g_new.s2 / g.s2 - 1.0).abs(),
                (g_new.rho - g.rho).abs(),
                (f_new - f).abs(),
            ]
            .into_iter()
            .fold(0.0, f64::max);
            g = g_new;
            f = f_new;
            if !(g.s1 > 0.0 && g.s2 > 0.0) || signal < 1.0 {
                break;
            }
            if change < cfg.tolerance {
                converged = true;
                break;
            }
        }
    }

    let cov = frame.to_covariance(&g)?;
    let std_errors = likelihood_errors(&pts, &g, f).map(|se| ParamErrors {
        mu1: frame.scale[0] * se[0],
        mu2: frame.scale[1] * se[1],
        tau1: frame.scale[0] * se[2],
        tau2: frame.scale[1] * se[3],
        rho_t: se[4],
        amplitude: se[5],
        background: se[5],
    });
    let degenerate = 1.0 - f < 0.05;
    Ok(FitResult {
        cov,
        amplitude: 1.0 - f,
        background_level: f,
        std_errors: if degenerate { None } else { std_errors },
        reduced_chi_squared: None,
        converged,
        iterations,
        degenerate_signal: degenerate,
        loss: Loss::MaximumLikelihood,
        events_used: events.len(),
    })
}

/// Standard errors from the observed information (finite-difference Hessian
/// of the log-likelihood) for `[m1, m2, s1, s2, rho, f]` in frame units. The
/// background fraction is held fixed when it sits on its boundary.
fn likelihood_errors(pts: &Points, g: &Gaussian, f: f64) -> Option<[f64; 6]> {
    let free_f = f > 1e-6;
    let n = if free_f { 6 } else { 5 };
    let base = [g.m1, g.m2, g.s1, g.s2, g.rho, f];
    let steps = [
        1e-4 * g.s1,
        1e-4 * g.s2,
        1e-4 * g.s1,
        1e-4 * g.s2,
        1e-4 * (1.0 - g.rho * g.rho),
        1e-4 * f.max(1e-3),
    ];
    let ll = |x: &[f64; 6]| -> f64 {
        let gg = Gaussian {
            m1: x[0],
            m2: x[1],
            s1: x[2],
            s2: x[3],
            rho: x[4],
        };
        pts.log_likelihood(&gg, x[5])
    };
    let mut h = nalgebra::DMatrix::<f64>::zeros(n, n);
    let l0 = ll(&base);
    for i in 0..n {
        for j in i..n {
            let v = if i == j {
                let mut a = base;
                let mut b = base;
                a[i] += steps[i];
                b[i] -= steps[i];
                (ll(&a) - 2.0 * l0 + ll(&b)) / (steps[i] * steps[i])
            } else {
                let mut pp = base;
                let mut pm = base;
                let mut mp = base;
                let mut mm = base;
                pp[i] += steps[i];
                pp[j] += steps[j];
                pm[i] += steps[i];
                pm[j] -= steps[j];
                mp[i] -= steps[i];
                mp[j] += steps[j];
                mm[i] -= steps[i];
                mm[j] -= steps[j];
                (ll(&pp) - ll(&pm) - ll(&mp) + ll(&mm)) / (4.0 * steps[i] * steps[j])
            };
            h[(i, j)] = -v;
            h[(j, i)] = -v;
        }
    }
    let cov = h.try_inverse()?;
    let mut se = [0.0; 6];
    for (i, s) in se.iter_mut().enumerate().take(n) {
        let v = cov[(i, i)];
        if !(v >= 0.0 && v.is_finite()) {
            return None;
        }
        *s = v.sqrt();
    }
    Some(se)
}

/// Bootstrap standard errors: refits `resamples` resampled copies of the data.
pub fn bootstrap_std_errors(
    events: &EventSet,
    cfg: &FitConfig,
    resamples: usize,
    seed: u64,
) -> Result<ParamErrors> {
    if resamples < 2 {
        return Err(Error::invalid("bootstrap needs at least two resamples"));
    }
    let n = events.len();
    let one = |k: usize| -> Option<[f64; 7]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let resampled = EventSet::new(
            (0..n)
                .map(|_| events.events[rng.random_range(0..n)])
                .collect(),
        );
        let r = fit(&resampled, cfg).ok()?;
        Some([
            r.cov.rho_t,
            r.cov.tau1,
            r.cov.tau2,
            r.cov.mu1,
            r.cov.mu2,
            r.amplitude,
            r.background_level,
        ])
    };
    let reps: Vec<[f64; 7]> = crate::par::map_range(resamples, one).into_iter().flatten().collect();
    if reps.len() < 2 {
        return Err(Error::Degenerate("bootstrap refits failed".into()));
    }
    let sd = |k: usize| {
        let v: Vec<f64> = reps.iter().map(|r| r[k]).collect();
        crate::stats::std_dev(&v)
    };
    Ok(ParamErrors {
        rho_t: sd(0),
        tau1: sd(1),
        tau2: sd(2),
        mu1: sd(3),
        mu2: sd(4),
        amplitude: sd(5),
        background: sd(6),
    })
}
