//! Heralded (windowed) analysis of events and of analytic models.
//!
//! A [`HeraldWindow`] accepts events whose heralding coordinate lies in the
//! closed interval `center ± width/2`. With [`HeraldDirection::OnTwo`] photon 2
//! heralds photon 1: the cut is applied to `t2` and statistics are taken over
//! `t1`. Widths are sample standard deviations throughout.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::ConditionalDensity;
use crate::error::{Error, Result};
use crate::lm::{self, LmConfig};
use crate::model::TemporalCovariance;
use crate::sampler::EventSet;
use crate::stats::{fit_line, mean, std_dev};

pub const MIN_SELECTED: usize = 30;
const BOOTSTRAP_RESAMPLES: usize = 200;
const BOOTSTRAP_SEED: u64 = 0x6865_7261_6c64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeraldDirection {
    /// Photon 2 heralds photon 1.
    OnTwo,
    /// Photon 1 heralds photon 2.
    OnOne,
}

impl HeraldDirection {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "on-two" | "2" | "herald-on-2" => Some(Self::OnTwo),
            "on-one" | "1" | "herald-on-1" => Some(Self::OnOne),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::OnTwo => "on-two",
            Self::OnOne => "on-one",
        }
    }

    /// `(heralding, heralded)` coordinates of an event.
    fn split(self, t1: f64, t2: f64) -> (f64, f64) {
        match self {
            Self::OnTwo => (t2, t1),
            Self::OnOne => (t1, t2),
        }
    }

    /// Covariance reoriented so that photon 1 is the heralded one.
    fn orient(self, cov: &TemporalCovariance) -> TemporalCovariance {
        match self {
            Self::OnTwo => *cov,
            Self::OnOne => cov.transposed(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeraldWindow {
    pub center: f64,
    /// Full width; `f64::INFINITY` accepts every event.
    pub width: f64,
    pub direction: HeraldDirection,
}

impl HeraldWindow {
    pub fn new(center: f64, width: f64, direction: HeraldDirection) -> Result<Self> {
        if !center.is_finite() {
            return Err(Error::invalid(format!("window center must be finite, got {center}")));
        }
        if !(width > 0.0) {
            return Err(Error::invalid(format!("window width must be positive, got {width}")));
        }
        Ok(Self {
            center,
            width,
            direction,
        })
    }

    pub fn unbounded(direction: HeraldDirection) -> Self {
        Self {
            center: 0.0,
            width: f64::INFINITY,
            direction,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.width.is_infinite() || (t - self.center).abs() <= 0.5 * self.width
    }
}

/// Events inside the window. An empty result carries `herald_empty = true`
/// in its metadata.
pub fn select(events: &EventSet, w: &HeraldWindow) -> EventSet {
    let kept = events
        .events
        .iter()
        .copied()
        .filter(|e| w.contains(w.direction.split(e.t1, e.t2).0))
        .collect();
    let mut out = EventSet {
        events: kept,
        metadata: events.metadata.clone(),
    };
    out.metadata.insert("herald_direction".into(), w.direction.name().into());
    out.metadata.insert("herald_center".into(), format!("{:e}", w.center));
    out.metadata.insert("herald_width".into(), format!("{:e}", w.width));
    out.metadata.insert("herald_selected".into(), out.len().to_string());
    if out.is_empty() {
        out.metadata.insert("herald_empty".into(), "true".into());
    }
    out
}

fn heralded_values(events: &EventSet, w: &HeraldWindow) -> Vec<f64> {
    events
        .events
        .iter()
        .filter_map(|e| {
            let (h, v) = w.direction.split(e.t1, e.t2);
            w.contains(h).then_some(v)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub count: usize,
}

fn bootstrap<F>(values: &[f64], stat: F) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    let n = values.len();
    let reps = crate::par::map_range(BOOTSTRAP_RESAMPLES, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(BOOTSTRAP_SEED);
        rng.set_stream(k as u64);
        let r: Vec<f64> = (0..n).map(|_| values[rng.random_range(0..n)]).collect();
        stat(&r)
    });
    std_dev(&reps)
}

/// Sample standard deviation of the heralded coordinate with a bootstrap
/// standard error.
pub fn heralded_width(events: &EventSet, w: &HeraldWindow) -> Result<Estimate> {
    let v = heralded_values(events, w);
    if v.len() < MIN_SELECTED {
        return Err(Error::TooFewEvents {
            needed: MIN_SELECTED,
            got: v.len(),
        });
    }
    Ok(Estimate {
        value: std_dev(&v),
        std_error: bootstrap(&v, std_dev),
        count: v.len(),
    })
}

/// Width from a Gaussian fitted to the histogram of the heralded coordinate
/// (Poisson-weighted, 40 bins over mean ± 4 sd). Standard error from the
/// fit curvature.
pub fn heralded_width_gaussian(events: &EventSet, w: &HeraldWindow) -> Result<Estimate> {
    let v = heralded_values(events, w);
    if v.len() < MIN_SELECTED {
        return Err(Error::TooFewEvents {
            needed: MIN_SELECTED,
            got: v.len(),
        });
    }
    let (m, s) = (mean(&v), std_dev(&v));
    if !(s > 0.0) {
        return Err(Error::Degenerate("heralded coordinate has zero spread".into()));
    }
    const BINS: usize = 40;
    let (lo, hi) = (m - 4.0 * s, m + 4.0 * s);
    let h = (hi - lo) / BINS as f64;
    let mut counts = [0.0f64; BINS];
    for &x in &v {
        if (lo..hi).contains(&x) {
            counts[(((x - lo) / h) as usize).min(BINS - 1)] += 1.0;
        }
    }
    // Model in units of s: [amplitude (events), mean offset, ln width].
    let expected = |p: &[f64], k: usize| {
        let (a, b) = (k as f64 * h / s - 4.0, (k + 1) as f64 * h / s - 4.0);
        let sd = p[2].exp();
        p[0] * crate::special::std_normal_interval((a - p[1]) / sd, (b - p[1]) / sd)
    };
    let mut var: Vec<f64> = counts.iter().map(|&c| c.max(1.0)).collect();
    let mut p = vec![v.len() as f64, 0.0, 0.0];
    let mut out = None;
    for _ in 0..10 {
        let sig: Vec<f64> = var.iter().map(|x| x.sqrt()).collect();
        let o = lm::minimize(
            |q, r| {
                for k in 0..BINS {
                    r[k] = (counts[k] - expected(q, k)) / sig[k];
                }
            },
            &p,
            BINS,
            &LmConfig::default(),
        );
        let done = o.params.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-9 * (b.abs() + 1.0));
        p = o.params.clone();
        out = Some(o);
        var = (0..BINS).map(|k| expected(&p, k).max(1e-2)).collect();
        if done {
            break;
        }
    }
    let o = out.expect("ran at least once");
    let width = s * p[2].exp();
    let se = o
        .covariance()
        .map(|c| width * c[(2, 2)].sqrt())
        .ok_or_else(|| Error::Degenerate("singular curvature in Gaussian width fit".into()))?;
    Ok(Estimate {
        value: width,
        std_error: se,
        count: v.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub dt: f64,
    pub ratio: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NarrowingCurve {
    pub center: f64,
    pub points: Vec<CurvePoint>,
    /// `sqrt(1 - rho_t^2)` of the reference covariance.
    pub asymptote: f64,
}

fn check_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.len() < 3 {
        return Err(Error::invalid(format!("{what} grid needs at least 3 points, got {}", grid.len())));
    }
    Ok(())
}

/// Ratio `tau1h(dT) / tau1` from the windowed conditional density.
pub fn narrowing_curve_model(
    cov: &TemporalCovariance,
    center: f64,
    widths: &[f64],
    direction: HeraldDirection,
) -> Result<NarrowingCurve> {
    check_grid(widths, "window width")?;
    let c = direction.orient(cov);
    let points = crate::par::map(widths, |&dt| -> Result<CurvePoint> {
        let m = ConditionalDensity::new(&c, center, dt)?.moments();
        Ok(CurvePoint {
            dt,
            ratio: m.std_dev / c.tau1,
            std_error: 0.0,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(NarrowingCurve {
        center,
        points,
        asymptote: (1.0 - cov.rho_t * cov.rho_t).sqrt(),
    })
}

/// Empirical ratio of the heralded to the unconditioned sample standard
/// deviation. Standard errors come from a joint bootstrap over all events, so
/// the ratio at an unbounded window is exactly 1 with zero error.
pub fn narrowing_curve_events(
    events: &EventSet,
    reference: &TemporalCovariance,
    center: f64,
    widths: &[f64],
    direction: HeraldDirection,
) -> Result<NarrowingCurve> {
    check_grid(widths, "window width")?;
    let pairs: Vec<(f64, f64)> = events.events.iter().map(|e| direction.split(e.t1, e.t2)).collect();
    let windows: Vec<HeraldWindow> = widths
        .iter()
        .map(|&dt| HeraldWindow::new(center, dt, direction))
        .collect::<Result<_>>()?;
    let ratios = |data: &[(f64, f64)]| -> Vec<Option<f64>> {
        let all: Vec<f64> = data.iter().map(|p| p.1).collect();
        let full = std_dev(&all);
        windows
            .iter()
            .map(|w| {
                let sel: Vec<f64> = data.iter().filter(|p| w.contains(p.0)).map(|p| p.1).collect();
                (sel.len() >= MIN_SELECTED).then(|| std_dev(&sel) / full)
            })
            .collect()
    };
    let point = ratios(&pairs);
    for (w, r) in windows.iter().zip(&point) {
        if r.is_none() {
            let got = pairs.iter().filter(|p| w.contains(p.0)).count();
            return Err(Error::TooFewEvents {
                needed: MIN_SELECTED,
                got,
            });
        }
    }
    let n = pairs.len();
    let reps = crate::par::map_range(BOOTSTRAP_RESAMPLES, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(BOOTSTRAP_SEED);
        rng.set_stream(k as u64);
        let r: Vec<(f64, f64)> = (0..n).map(|_| pairs[rng.random_range(0..n)]).collect();
        ratios(&r)
    });
    let points = windows
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let vals: Vec<f64> = reps.iter().filter_map(|r| r[i]).collect();
            CurvePoint {
                dt: w.width,
                ratio: point[i].expect("checked above"),
                std_error: if w.width.is_infinite() { 0.0 } else { std_dev(&vals) },
            }
        })
        .collect();
    Ok(NarrowingCurve {
        center,
        points,
        asymptote: (1.0 - reference.rho_t * reference.rho_t).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentroidPoint {
    pub center: f64,
    pub mean: f64,
    pub std_error: f64,
}

/// Heralded mean arrival time versus window center, from the model.
pub fn centroid_curve_model(
    cov: &TemporalCovariance,
    width: f64,
    centers: &[f64],
    direction: HeraldDirection,
) -> Result<Vec<CentroidPoint>> {
    check_grid(centers, "window center")?;
    let c = direction.orient(cov);
    crate::par::map(centers, |&t2| -> Result<CentroidPoint> {
        let m = ConditionalDensity::new(&c, t2, width)?.moments();
        Ok(CentroidPoint {
            center: t2,
            mean: m.mean,
            std_error: 0.0,
        })
    })
    .into_iter()
    .collect()
}

/// Heralded sample mean versus window center, with standard error `s/sqrt(n)`.
pub fn centroid_curve_events(
    events: &EventSet,
    width: f64,
    centers: &[f64],
    direction: HeraldDirection,
) -> Result<Vec<CentroidPoint>> {
    check_grid(centers, "window center")?;
    centers
        .iter()
        .map(|&t2| {
            let w = HeraldWindow::new(t2, width, direction)?;
            let v = heralded_values(events, &w);
            if v.len() < MIN_SELECTED {
                return Err(Error::TooFewEvents {
                    needed: MIN_SELECTED,
                    got: v.len(),
                });
            }
            Ok(CentroidPoint {
                center: t2,
                mean: mean(&v),
                std_error: std_dev(&v) / (v.len() as f64).sqrt(),
            })
        })
        .collect()
}

/// Least-squares line through a centroid curve: `(slope, intercept, max residual)`.
pub fn centroid_slope(points: &[CentroidPoint]) -> (f64, f64, f64) {
    let xs: Vec<f64> = points.iter().map(|p| p.center).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean).collect();
    fit_line(&xs, &ys)
}
