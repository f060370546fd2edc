//! Temporal statistics of frequency-correlated photon pairs after dispersive
//! fiber propagation.
//!
//! The crate covers the full loop from source parameters to measured
//! coincidences and back:
//!
//! * [`model`] – source, link and arrival-time parameter types;
//! * [`analytic`] – closed-form densities, widths and source optima;
//! * [`sampler`] – seeded Monte-Carlo coincidence generation;
//! * [`fit`] – recovery of the arrival-time statistics from events;
//! * [`herald`] – windowed (heralded) analysis of events and models;
//! * [`io`] and [`config`] – event files, reports and run configuration;
//! * [`reproduce`] – canned reproduction recipes with stored targets.

pub mod analytic;
pub mod config;
pub mod error;
pub mod fit;
pub mod herald;
pub mod io;
pub mod lm;
pub mod model;
mod par;
pub mod reproduce;
pub mod sampler;
pub mod special;
pub mod stats;
pub mod units;

pub use error::{Error, Result};
pub use model::{LinkParams, Pump, SourceParams, SourceParamsRho, TemporalCovariance};
