//! Parameter types for the photon-pair source, the fiber link and the
//! observable arrival-time statistics.
//!
//! The source is described either by the crystal phase-matching width `sigma`
//! and the pump duration `tau_p`, or equivalently by the single-photon spectral
//! width `sigma0` and the spectral correlation coefficient `rho`. The biphoton
//! amplitude is
//!
//! ```text
//! phi(v1, v2) ∝ exp(-(v1 - v2)² / sigma² - (v1 + v2)² tau_p² / 4)
//! ```
//!
//! and the two descriptions are related by `tau_p = 1 / (sigma0 sqrt(1 + rho))`,
//! `sigma = 2 sigma0 sqrt(1 - rho)`.
//!
//! Link dispersion is stored as `beta`, the coefficient of the quadratic
//! spectral phase `exp(i beta L v²)` picked up in each arm. Fiber datasheets
//! and some measurements quote `2 beta` instead; use
//! [`LinkParams::from_two_beta`] for those.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pump laser temporal profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pump {
    /// Transform-limited pulse of duration `tau_p` seconds.
    Pulsed { tau_p: f64 },
    /// Continuous-wave pump, the `tau_p -> ∞` limit.
    ContinuousWave,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceParams {
    /// Effective phase-matching width, 1/s.
    pub sigma: f64,
    pub pump: Pump,
}

impl SourceParams {
    pub fn pulsed(sigma: f64, tau_p: f64) -> Result<Self> {
        check_positive("sigma", sigma)?;
        check_positive("tau_p", tau_p)?;
        Ok(Self {
            sigma,
            pump: Pump::Pulsed { tau_p },
        })
    }

    pub fn continuous_wave(sigma: f64) -> Result<Self> {
        check_positive("sigma", sigma)?;
        Ok(Self {
            sigma,
            pump: Pump::ContinuousWave,
        })
    }

    pub fn tau_p(&self) -> Option<f64> {
        match self.pump {
            Pump::Pulsed { tau_p } => Some(tau_p),
            Pump::ContinuousWave => None,
        }
    }
}

/// Source described by single-photon bandwidth and spectral correlation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceParamsRho {
    /// Single-photon spectral width, 1/s.
    pub sigma0: f64,
    /// Spectral correlation coefficient, strictly inside (-1, 1).
    pub rho: f64,
}

impl SourceParamsRho {
    pub fn new(sigma0: f64, rho: f64) -> Result<Self> {
        check_positive("sigma0", sigma0)?;
        check_correlation("rho", rho)?;
        Ok(Self { sigma0, rho })
    }
}

/// Symmetric pair of fiber links.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Quadratic spectral phase coefficient, s²/m. Sign is kept.
    pub beta: f64,
    /// Fiber length of each arm, m.
    pub length: f64,
}

impl LinkParams {
    pub fn new(beta: f64, length: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::invalid(format!("beta must be finite, got {beta}")));
        }
        if !(length >= 0.0 && length.is_finite()) {
            return Err(Error::invalid(format!(
                "fiber length must be >= 0, got {length}"
            )));
        }
        Ok(Self { beta, length })
    }

    /// Builds the link from a measured `2 beta` value.
    pub fn from_two_beta(two_beta: f64, length: f64) -> Result<Self> {
        Self::new(two_beta / 2.0, length)
    }

    /// `|beta| L`, the accumulated dispersion that sets every width scale.
    pub fn accumulated_gvd(&self) -> f64 {
        self.beta.abs() * self.length
    }
}

/// Bivariate-normal arrival-time statistics of a photon pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemporalCovariance {
    pub rho_t: f64,
    /// Standard deviation of the first photon's arrival time, s.
    pub tau1: f64,
    /// Standard deviation of the second photon's arrival time, s.
    pub tau2: f64,
    #[serde(default)]
    pub mu1: f64,
    #[serde(default)]
    pub mu2: f64,
}

impl TemporalCovariance {
    pub fn new(rho_t: f64, tau1: f64, tau2: f64) -> Result<Self> {
        Self::with_centroids(rho_t, tau1, tau2, 0.0, 0.0)
    }

    pub fn with_centroids(rho_t: f64, tau1: f64, tau2: f64, mu1: f64, mu2: f64) -> Result<Self> {
        check_correlation("rho_t", rho_t)?;
        check_positive("tau1", tau1)?;
        check_positive("tau2", tau2)?;
        if !(mu1.is_finite() && mu2.is_finite()) {
            return Err(Error::invalid("centroids must be finite"));
        }
        Ok(Self {
            rho_t,
            tau1,
            tau2,
            mu1,
            mu2,
        })
    }

    /// Row-major covariance matrix `[[τ1², ρτ1τ2], [ρτ1τ2, τ2²]]`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let off = self.rho_t * self.tau1 * self.tau2;
        [[self.tau1 * self.tau1, off], [off, self.tau2 * self.tau2]]
    }

    /// Same statistics with the photon labels exchanged.
    pub fn transposed(&self) -> Self {
        Self {
            rho_t: self.rho_t,
            tau1: self.tau2,
            tau2: self.tau1,
            mu1: self.mu2,
            mu2: self.mu1,
        }
    }

    /// Shifts both centroids to zero.
    pub fn centered(&self) -> Self {
        Self {
            mu1: 0.0,
            mu2: 0.0,
            ..*self
        }
    }
}

/// Converts `(sigma, tau_p)` to `(sigma0, rho)`.
///
/// A CW pump sits at `rho = -1`, outside the open interval, and is rejected.
pub fn to_rho_form(p: &SourceParams) -> Result<SourceParamsRho> {
    let tau_p = p.tau_p().ok_or_else(|| {
        Error::invalid("a CW pump corresponds to rho = -1, which has no finite (sigma0, rho) form")
    })?;
    let x = (p.sigma * tau_p).powi(2);
    let rho = (4.0 - x) / (4.0 + x);
    // sigma0² = sigma² / (4 (1 - rho)), with 1 - rho = 2x / (4 + x) written out
    // to avoid cancellation when rho is close to 1.
    let sigma0 = (p.sigma * p.sigma * (4.0 + x) / (8.0 * x)).sqrt();
    Ok(SourceParamsRho { sigma0, rho })
}

/// Converts `(sigma0, rho)` to `(sigma, tau_p)`.
pub fn from_rho_form(p: &SourceParamsRho) -> Result<SourceParams> {
    check_positive("sigma0", p.sigma0)?;
    if !(p.rho > -1.0 && p.rho < 1.0) {
        return Err(Error::invalid(format!(
            "rho must lie in (-1, 1), got {}",
            p.rho
        )));
    }
    let tau_p = 1.0 / (p.sigma0 * (1.0 + p.rho).sqrt());
    let sigma = 2.0 * p.sigma0 * (1.0 - p.rho).sqrt();
    SourceParams::pulsed(sigma, tau_p)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_correlation(name: &str, v: f64) -> Result<()> {
    if v > -1.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must lie in (-1, 1), got {v}")))
    }
}
