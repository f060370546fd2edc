//! Seeded Monte-Carlo generation of coincidence events.
//!
//! True arrival-time pairs are drawn from the bivariate normal by a Cholesky
//! transform of two independent standard normals. Detector jitter is added per
//! channel, and the reference-clock jitter is added as a common shift to both
//! channels because both time stamps are taken relative to the same pump
//! reference pulse. A fraction of events can be replaced by background drawn
//! uniformly over a window in both coordinates.
//!
//! Random numbers come from ChaCha8. Events are produced in fixed-size chunks;
//! chunk `k` uses the generator seeded with `seed` on stream `k`, so the output
//! is bit-identical whatever the number of worker threads.

use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::error::{Error, Result};
use crate::model::{LinkParams, SourceParams, TemporalCovariance};
use crate::units::format_number;

const CHUNK: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Event {
    pub t1: f64,
    pub t2: f64,
}

/// Coincidence records with free-form metadata.
///
/// Metadata is kept sorted so that serialisation is deterministic.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct EventSet {
    pub events: Vec<Event>,
    pub metadata: BTreeMap<String, String>,
}

impl EventSet {
    pub fn new(events: Vec<Event>) -> Self {
        Self {
            events,
            metadata: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn t1(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.t1).collect()
    }

    pub fn t2(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.t2).collect()
    }

    /// Swaps the photon labels of every event.
    pub fn transposed(&self) -> Self {
        Self {
            events: self.events.iter().map(|e| Event { t1: e.t2, t2: e.t1 }).collect(),
            metadata: self.metadata.clone(),
        }
    }

    /// Adds the same offset to every time stamp.
    pub fn shifted(&self, dt1: f64, dt2: f64) -> Self {
        Self {
            events: self
                .events
                .iter()
                .map(|e| Event {
                    t1: e.t1 + dt1,
                    t2: e.t2 + dt2,
                })
                .collect(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn with_number(self, key: &str, value: f64) -> Self {
        self.with_meta(key, format_number(value))
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }
}

/// Timing response of the detection chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    /// Gaussian jitter of channel 1, s.
    pub jitter1: f64,
    /// Gaussian jitter of channel 2, s.
    pub jitter2: f64,
    /// Jitter of the pump reference, common to both channels, s.
    pub reference_jitter: f64,
    /// Fraction of events replaced by uniform background, in `[0, 1)`.
    pub background_rate: f64,
    /// Support `(lo, hi)` of the background in both coordinates, s.
    pub window: Option<(f64, f64)>,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl DetectorModel {
    pub fn ideal() -> Self {
        Self {
            jitter1: 0.0,
            jitter2: 0.0,
            reference_jitter: 0.0,
            background_rate: 0.0,
            window: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("jitter1", self.jitter1),
            ("jitter2", self.jitter2),
            ("reference_jitter", self.reference_jitter),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.background_rate) {
            return Err(Error::invalid(format!(
                "background_rate must lie in [0, 1), got {}",
                self.background_rate
            )));
        }
        match self.window {
            Some((lo, hi)) if !(hi > lo && lo.is_finite() && hi.is_finite()) => Err(Error::invalid(
                format!("background window must satisfy lo < hi, got ({lo:e}, {hi:e})"),
            )),
            None if self.background_rate > 0.0 => Err(Error::invalid(
                "a background window is required when background_rate > 0",
            )),
            _ => Ok(()),
        }
    }

    /// Covariance observed after jitter: bare covariance plus per-channel jitter
    /// on the diagonal and the common reference jitter on every entry.
    pub fn convolve(&self, cov: &TemporalCovariance) -> TemporalCovariance {
        let r2 = self.reference_jitter * self.reference_jitter;
        let v1 = cov.tau1 * cov.tau1 + self.jitter1 * self.jitter1 + r2;
        let v2 = cov.tau2 * cov.tau2 + self.jitter2 * self.jitter2 + r2;
        let c12 = cov.rho_t * cov.tau1 * cov.tau2 + r2;
        TemporalCovariance {
            rho_t: c12 / (v1 * v2).sqrt(),
            tau1: v1.sqrt(),
            tau2: v2.sqrt(),
            mu1: cov.mu1,
            mu2: cov.mu2,
        }
    }
}

/// Draws `n` coincidence events.
pub fn sample(cov: &TemporalCovariance, det: &DetectorModel, n: usize, seed: u64) -> Result<EventSet> {
    if n == 0 {
        return Err(Error::invalid("event count must be at least 1"));
    }
    det.validate()?;
    let cov = TemporalCovariance::with_centroids(cov.rho_t, cov.tau1, cov.tau2, cov.mu1, cov.mu2)?;
    let chunks = n.div_ceil(CHUNK);
    let gen = |k: usize| -> Vec<Event> {
        let len = CHUNK.min(n - k * CHUNK);
        generate_chunk(&cov, det, len, seed, k as u64)
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Vec<Event>> = (0..chunks).into_par_iter().map(gen).collect();
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Vec<Event>> = (0..chunks).map(gen).collect();

    let mut set = EventSet::new(parts.concat());
    let meta = &mut set.metadata;
    meta.insert("generator".into(), "chacha8-chunked".into());
    meta.insert("seed".into(), seed.to_string());
    meta.insert("rho_t".into(), format_number(cov.rho_t));
    meta.insert("tau1".into(), format_number(cov.tau1));
    meta.insert("tau2".into(), format_number(cov.tau2));
    meta.insert("mu1".into(), format_number(cov.mu1));
    meta.insert("mu2".into(), format_number(cov.mu2));
    meta.insert("jitter1".into(), format_number(det.jitter1));
    meta.insert("jitter2".into(), format_number(det.jitter2));
    meta.insert("reference_jitter".into(), format_number(det.reference_jitter));
    meta.insert("background_rate".into(), format_number(det.background_rate));
    if let Some((lo, hi)) = det.window {
        meta.insert("window_lo".into(), format_number(lo));
        meta.insert("window_hi".into(), format_number(hi));
    }
    Ok(set)
}

fn generate_chunk(cov: &TemporalCovariance, det: &DetectorModel, len: usize, seed: u64, stream: u64) -> Vec<Event> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let c = (1.0 - cov.rho_t * cov.rho_t).sqrt();
    let (lo, hi) = det.window.unwrap_or((0.0, 0.0));
    (0..len)
        .map(|_| {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let zr: f64 = rng.sample(StandardNormal);
            let j1: f64 = rng.sample(StandardNormal);
            let j2: f64 = rng.sample(StandardNormal);
            let u: f64 = rng.random();
            let (b1, b2): (f64, f64) = (rng.random(), rng.random());
            if u < det.background_rate {
                return Event {
                    t1: lo + (hi - lo) * b1,
                    t2: lo + (hi - lo) * b2,
                };
            }
            let common = det.reference_jitter * zr;
            Event {
                t1: cov.mu1 + cov.tau1 * z1 + det.jitter1 * j1 + common,
                t2: cov.mu2 + cov.tau2 * (cov.rho_t * z1 + c * z2) + det.jitter2 * j2 + common,
            }
        })
        .collect()
}

/// Draws events for a source/link pair via the implied arrival-time statistics.
pub fn sample_from_source(
    src: &SourceParams,
    link: &LinkParams,
    det: &DetectorModel,
    n: usize,
    seed: u64,
) -> Result<EventSet> {
    let cov = analytic::temporal_covariance(src, link)?;
    let mut set = sample(&cov, det, n, seed)?;
    set.metadata.insert("sigma".into(), format_number(src.sigma));
    if let Some(tau_p) = src.tau_p() {
        set.metadata.insert("tau_p".into(), format_number(tau_p));
    }
    set.metadata.insert("beta".into(), format_number(link.beta));
    set.metadata.insert("length".into(), format_number(link.length));
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::pair_moments;

    fn set1() -> TemporalCovariance {
        TemporalCovariance::new(0.9551, 1.136e-9, 1.312e-9).unwrap()
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = sample(&set1(), &DetectorModel::ideal(), 40_000, 7).unwrap();
        let b = sample(&set1(), &DetectorModel::ideal(), 40_000, 7).unwrap();
        assert_eq!(a, b);
        let c = sample(&set1(), &DetectorModel::ideal(), 40_000, 8).unwrap();
        assert_ne!(a.events, c.events);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn independent_of_thread_count() {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| sample(&set1(), &DetectorModel::ideal(), 100_000, 3).unwrap());
        let b = four.install(|| sample(&set1(), &DetectorModel::ideal(), 100_000, 3).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn prefix_is_stable_across_lengths() {
        let a = sample(&set1(), &DetectorModel::ideal(), 20_000, 11).unwrap();
        let b = sample(&set1(), &DetectorModel::ideal(), 50_000, 11).unwrap();
        assert_eq!(a.events[..], b.events[..20_000]);
    }

    #[test]
    fn table1_set1_moments() {
        let s = sample(&set1(), &DetectorModel::ideal(), 82_000, 2024).unwrap();
        let m = pair_moments(&s.t1(), &s.t2());
        assert!((m.correlation - 0.9551).abs() < 0.003, "{}", m.correlation);
        assert!((m.std1 / 1.136e-9 - 1.0).abs() < 0.01);
        assert!((m.std2 / 1.312e-9 - 1.0).abs() < 0.01);
    }

    #[test]
    fn jitter_adds_in_quadrature() {
        let cov = TemporalCovariance::new(-0.4443, 0.2146e-9, 0.2313e-9).unwrap();
        let det = DetectorModel {
            jitter1: 45e-12,
            ..DetectorModel::ideal()
        };
        let expected = det.convolve(&cov).tau1;
        assert!((expected - 219.3e-12).abs() < 0.05e-12, "{expected}");
        let s = sample(&cov, &det, 200_000, 5).unwrap();
        let m = pair_moments(&s.t1(), &s.t2());
        // Standard error of a sample standard deviation is about tau / sqrt(2n).
        let se = expected / (2.0 * 200_000f64).sqrt();
        assert!((m.std1 - expected).abs() < 4.0 * se);
    }

    #[test]
    fn background_replaces_the_requested_fraction() {
        let det = DetectorModel {
            background_rate: 0.25,
            window: Some((-50e-9, 50e-9)),
            ..DetectorModel::ideal()
        };
        let s = sample(&set1(), &det, 100_000, 1).unwrap();
        let far = s
            .events
            .iter()
            .filter(|e| e.t1.abs() > 10e-9 || e.t2.abs() > 10e-9)
            .count() as f64;
        // P(background event lands outside the ±10 ns square) = 1 - 0.2² = 0.96.
        let expected = 100_000.0 * 0.25 * 0.96;
        assert!((far - expected).abs() < 5.0 * expected.sqrt(), "{far}");
    }

    #[test]
    fn invalid_detectors_rejected() {
        let bad = [
            DetectorModel { jitter1: -1.0, ..DetectorModel::ideal() },
            DetectorModel { background_rate: 1.0, window: Some((0.0, 1.0)), ..DetectorModel::ideal() },
            DetectorModel { background_rate: 0.1, ..DetectorModel::ideal() },
            DetectorModel { window: Some((1.0, 1.0)), ..DetectorModel::ideal() },
        ];
        for det in bad {
            assert!(sample(&set1(), &det, 10, 0).is_err());
        }
        assert!(sample(&set1(), &DetectorModel::ideal(), 0, 0).is_err());
    }

    #[test]
    fn decorrelated_source_gives_uncorrelated_times() {
        let sigma = 2e12;
        let src = SourceParams::pulsed(sigma, 2.0 / sigma).unwrap();
        let link = LinkParams::new(0.0, 1e4).unwrap();
        let n = 100_000;
        let s = sample_from_source(&src, &link, &DetectorModel::ideal(), n, 9).unwrap();
        let r = pair_moments(&s.t1(), &s.t2()).correlation;
        assert!(r.abs() < 3.0 / (n as f64).sqrt(), "{r}");
    }

    #[test]
    fn cw_source_propagates_divergence() {
        let src = SourceParams::continuous_wave(1e12).unwrap();
        let link = LinkParams::new(-1e-26, 1e4).unwrap();
        assert!(matches!(
            sample_from_source(&src, &link, &DetectorModel::ideal(), 10, 0),
            Err(Error::Divergent(_))
        ));
    }
}
