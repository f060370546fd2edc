//! Run configuration: a TOML file whose dimensional values carry unit suffixes.
//!
//! ```toml
//! [source]
//! sigma = "3.29 THz"
//! tau_p = "964 fs"
//!
//! [link]
//! two_beta = "-2.27e-26 s^2/m"
//! length = "10 km"
//!
//! [sampler]
//! n = 82000
//! seed = 7
//! ```
//!
//! Every key is listed in [`CONFIG_KEYS`]. Unknown sections or keys, wrong
//! types, unknown units and broken invariants are all collected and reported
//! together in a single [`Error::Config`].

use std::path::Path;

use crate::analytic::{self, LogGrid, WidthKind};
use crate::error::{Error, Result};
use crate::fit::{BinWeighting, FitConfig, Loss, RangePolicy};
use crate::herald::HeraldDirection;
use crate::model::{LinkParams, SourceParams, SourceParamsRho, TemporalCovariance};
use crate::sampler::DetectorModel;
use crate::units::{parse_quantity, Dimension};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Number or `"value unit"` string.
    Quantity(Dimension),
    /// Two-element array of quantities.
    Range(Dimension),
    Integer,
    Bool,
    Choice(&'static [&'static str]),
}

impl Kind {
    fn describe(self) -> String {
        match self {
            Kind::Quantity(Dimension::Dimensionless) => "number".into(),
            Kind::Quantity(d) => format!("quantity [{}]", d.si_unit()),
            Kind::Range(d) => format!("[lo, hi] in {}", d.si_unit()),
            Kind::Integer => "integer".into(),
            Kind::Bool => "true/false".into(),
            Kind::Choice(c) => c.join(" | "),
        }
    }
}

pub struct KeySpec {
    pub section: &'static str,
    pub key: &'static str,
    pub kind: Kind,
    pub help: &'static str,
}

const fn spec(section: &'static str, key: &'static str, kind: Kind, help: &'static str) -> KeySpec {
    KeySpec {
        section,
        key,
        kind,
        help,
    }
}

use Dimension::{Dimensionless as D0, Dispersion, Length, Rate, Time, Wavelength};

const LOSSES: &[&str] = &["histogram-least-squares", "maximum-likelihood"];
const WEIGHTINGS: &[&str] = &["model", "observed"];
const DIRECTIONS: &[&str] = &["on-two", "on-one"];
const WHICH: &[&str] = &["tau1", "tau1h_0", "tau1h_dt_0", "all"];

pub const CONFIG_KEYS: &[KeySpec] = &[
    spec("source", "sigma", Kind::Quantity(Rate), "effective phase-matching width"),
    spec("source", "tau_p", Kind::Quantity(Time), "pump pulse duration"),
    spec("source", "cw", Kind::Bool, "continuous-wave pump instead of tau_p"),
    spec("source", "sigma0", Kind::Quantity(Rate), "single-photon spectral width (with rho)"),
    spec("source", "rho", Kind::Quantity(D0), "spectral correlation coefficient (with sigma0)"),
    spec("source", "delta_lambda", Kind::Quantity(Wavelength), "pump bandwidth, recorded in reports"),
    spec("link", "beta", Kind::Quantity(Dispersion), "group-velocity dispersion per arm"),
    spec("link", "two_beta", Kind::Quantity(Dispersion), "twice the dispersion (alternative to beta)"),
    spec("link", "length", Kind::Quantity(Length), "fiber length per arm"),
    spec("covariance", "rho_t", Kind::Quantity(D0), "temporal correlation (overrides source/link)"),
    spec("covariance", "tau1", Kind::Quantity(Time), "arrival-time width of photon 1"),
    spec("covariance", "tau2", Kind::Quantity(Time), "arrival-time width of photon 2"),
    spec("covariance", "mu1", Kind::Quantity(Time), "centroid of photon 1 (default 0)"),
    spec("covariance", "mu2", Kind::Quantity(Time), "centroid of photon 2 (default 0)"),
    spec("detector", "jitter1", Kind::Quantity(Time), "Gaussian jitter of channel 1"),
    spec("detector", "jitter2", Kind::Quantity(Time), "Gaussian jitter of channel 2"),
    spec("detector", "reference_jitter", Kind::Quantity(Time), "jitter common to both channels"),
    spec("detector", "background_rate", Kind::Quantity(D0), "fraction of uniform background events"),
    spec("detector", "window", Kind::Range(Time), "support of the background"),
    spec("sampler", "n", Kind::Integer, "number of events"),
    spec("sampler", "seed", Kind::Integer, "random seed"),
    spec("fit", "bins1", Kind::Integer, "histogram bins along t1"),
    spec("fit", "bins2", Kind::Integer, "histogram bins along t2"),
    spec("fit", "quantile_lower", Kind::Quantity(D0), "lower quantile of the fit box"),
    spec("fit", "quantile_upper", Kind::Quantity(D0), "upper quantile of the fit box"),
    spec("fit", "range_t1", Kind::Range(Time), "explicit fit box along t1"),
    spec("fit", "range_t2", Kind::Range(Time), "explicit fit box along t2"),
    spec("fit", "loss", Kind::Choice(LOSSES), "estimator"),
    spec("fit", "weighting", Kind::Choice(WEIGHTINGS), "histogram bin variances"),
    spec("fit", "max_iterations", Kind::Integer, "iteration cap"),
    spec("fit", "tolerance", Kind::Quantity(D0), "relative parameter change at convergence"),
    spec("fit", "bootstrap", Kind::Integer, "bootstrap resamples for standard errors (0 = off)"),
    spec("herald", "direction", Kind::Choice(DIRECTIONS), "which photon heralds"),
    spec("herald", "center", Kind::Quantity(Time), "window center for width curves"),
    spec("herald", "width", Kind::Quantity(Time), "window width for centroid curves"),
    spec("herald", "widths", Kind::Range(Time), "log-spaced window widths [min, max]"),
    spec("herald", "width_points", Kind::Integer, "number of window widths"),
    spec("herald", "centers", Kind::Range(Time), "linearly spaced window centers [min, max]"),
    spec("herald", "center_points", Kind::Integer, "number of window centers"),
    spec("landscape", "which", Kind::Choice(WHICH), "width to map"),
    spec("landscape", "tau_p", Kind::Range(Time), "log grid of pump durations [min, max]"),
    spec("landscape", "tau_p_points", Kind::Integer, "pump-duration grid points"),
    spec("landscape", "sigma", Kind::Range(Rate), "log grid of phase-matching widths [min, max]"),
    spec("landscape", "sigma_points", Kind::Integer, "phase-matching grid points"),
];

/// `--help` text enumerating every key with its type and unit.
pub fn keys_help() -> String {
    let mut out = String::from("Configuration keys (section.key  type  description):\n");
    for k in CONFIG_KEYS {
        out.push_str(&format!(
            "  {:<28} {:<26} {}\n",
            format!("{}.{}", k.section, k.key),
            k.kind.describe(),
            k.help
        ));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SourceSpec {
    Widths(SourceParams),
    Correlation(SourceParamsRho),
}

impl SourceSpec {
    pub fn params(&self) -> Result<SourceParams> {
        match self {
            SourceSpec::Widths(p) => Ok(*p),
            SourceSpec::Correlation(r) => crate::model::from_rho_form(r),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplerConfig {
    pub n: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitSection {
    pub config: FitConfig,
    pub bootstrap: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HeraldConfig {
    pub direction: HeraldDirection,
    pub center: f64,
    pub width: f64,
    pub widths: LogGrid,
    pub centers: (f64, f64),
    pub center_points: usize,
}

impl HeraldConfig {
    /// Width grid followed by an unbounded window.
    pub fn width_grid(&self) -> Vec<f64> {
        let mut v = self.widths.values();
        v.push(f64::INFINITY);
        v
    }

    pub fn center_grid(&self) -> Vec<f64> {
        let (lo, hi) = self.centers;
        let n = self.center_points;
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LandscapeConfig {
    pub which: Vec<WidthKind>,
    pub tau_p: LogGrid,
    pub sigma: LogGrid,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub source: Option<SourceSpec>,
    pub delta_lambda: Option<f64>,
    pub link: Option<LinkParams>,
    pub covariance: Option<TemporalCovariance>,
    pub detector: DetectorModel,
    pub sampler: SamplerConfig,
    pub fit: FitSection,
    pub herald: HeraldConfig,
    pub landscape: LandscapeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_table(toml::Table::new()).expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(vec![format!("TOML syntax: {}", e.message())]))?;
        apply_overrides(&mut table, overrides)?;
        Self::from_table(table)
    }

    /// Validates and converts a parsed table.
    pub fn from_table(table: toml::Table) -> Result<Self> {
        let mut r = Reader {
            table,
            problems: Vec::new(),
        };
        r.check_unknown();
        let cfg = r.build();
        if r.problems.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(r.problems))
        }
    }

    /// Arrival-time statistics implied by the configuration: the explicit
    /// `[covariance]` section if present, otherwise source and link.
    pub fn covariance(&self) -> Result<TemporalCovariance> {
        if let Some(c) = self.covariance {
            return Ok(c);
        }
        match (&self.source, &self.link) {
            (Some(s), Some(l)) => analytic::temporal_covariance(&s.params()?, l),
            _ => Err(Error::Config(vec![
                "need either a [covariance] section or both [source] and [link]".into(),
            ])),
        }
    }

    pub fn source_params(&self) -> Result<SourceParams> {
        self.source
            .as_ref()
            .ok_or_else(|| Error::Config(vec!["missing [source] section".into()]))?
            .params()
    }

    pub fn link_params(&self) -> Result<LinkParams> {
        self.link
            .ok_or_else(|| Error::Config(vec!["missing [link] section".into()]))
    }
}

/// Applies `section.key=value` overrides. Values are read as TOML literals
/// when possible and as plain strings otherwise (so `length=10 km` works).
pub fn apply_overrides(table: &mut toml::Table, overrides: &[String]) -> Result<()> {
    let mut problems = Vec::new();
    for o in overrides {
        let Some((path, value)) = o.split_once('=') else {
            problems.push(format!("override {o:?} is not section.key=value"));
            continue;
        };
        let Some((section, key)) = path.trim().split_once('.') else {
            problems.push(format!("override key {path:?} is not section.key"));
            continue;
        };
        let value = value.trim();
        let parsed = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        let entry = table
            .entry(section.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match entry.as_table_mut() {
            Some(t) => {
                t.insert(key.to_string(), parsed);
            }
            None => problems.push(format!("override {path:?}: {section} is not a section")),
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(problems))
    }
}

struct Reader {
    table: toml::Table,
    problems: Vec<String>,
}

impl Reader {
    fn check_unknown(&mut self) {
        let mut problems = Vec::new();
        for (section, value) in &self.table {
            let known_section = CONFIG_KEYS.iter().any(|k| k.section == section);
            if !known_section {
                problems.push(format!("unknown section [{section}]"));
                continue;
            }
            let Some(t) = value.as_table() else {
                problems.push(format!("{section} must be a section, not a value"));
                continue;
            };
            for key in t.keys() {
                if !CONFIG_KEYS.iter().any(|k| k.section == section && k.key == key) {
                    problems.push(format!("unknown key {section}.{key}"));
                }
            }
        }
        self.problems.extend(problems);
    }

    fn has_section(&self, section: &str) -> bool {
        self.table.get(section).and_then(|v| v.as_table()).is_some()
    }

    fn raw(&self, section: &str, key: &str) -> Option<&toml::Value> {
        self.table.get(section)?.as_table()?.get(key)
    }

    fn kind(section: &str, key: &str) -> Kind {
        CONFIG_KEYS
            .iter()
            .find(|k| k.section == section && k.key == key)
            .map(|k| k.kind)
            .expect("reader asks only for declared keys")
    }

    fn quantity_of(&mut self, name: &str, v: &toml::Value, dim: Dimension) -> Option<f64> {
        let out = match v {
            toml::Value::Float(f) => Ok(*f),
            toml::Value::Integer(i) => Ok(*i as f64),
            toml::Value::String(s) => parse_quantity(s, dim).map_err(|e| e.to_string()),
            other => Err(format!("expected a {} quantity, got {}", dim, other.type_str())),
        };
        match out {
            Ok(x) if x.is_finite() => Some(x),
            Ok(x) => {
                self.problems.push(format!("{name}: value {x} is not finite"));
                None
            }
            Err(e) => {
                self.problems.push(format!("{name}: {e}"));
                None
            }
        }
    }

    fn quantity(&mut self, section: &str, key: &str) -> Option<f64> {
        let Kind::Quantity(dim) = Self::kind(section, key) else {
            unreachable!()
        };
        let v = self.raw(section, key)?.clone();
        self.quantity_of(&format!("{section}.{key}"), &v, dim)
    }

    fn range(&mut self, section: &str, key: &str) -> Option<(f64, f64)> {
        let Kind::Range(dim) = Self::kind(section, key) else {
            unreachable!()
        };
        let name = format!("{section}.{key}");
        let v = self.raw(section, key)?.clone();
        let Some(arr) = v.as_array().filter(|a| a.len() == 2) else {
            self.problems.push(format!("{name}: expected a two-element array [lo, hi]"));
            return None;
        };
        let lo = self.quantity_of(&name, &arr[0], dim)?;
        let hi = self.quantity_of(&name, &arr[1], dim)?;
        if !(hi > lo) {
            self.problems.push(format!("{name}: need lo < hi, got [{lo:e}, {hi:e}]"));
            return None;
        }
        Some((lo, hi))
    }

    fn integer(&mut self, section: &str, key: &str) -> Option<u64> {
        let v = self.raw(section, key)?;
        match v.as_integer() {
            Some(i) if i >= 0 => Some(i as u64),
            _ => {
                self.problems
                    .push(format!("{section}.{key}: expected a non-negative integer, got {v}"));
                None
            }
        }
    }

    fn boolean(&mut self, section: &str, key: &str) -> Option<bool> {
        let v = self.raw(section, key)?;
        match v.as_bool() {
            Some(b) => Some(b),
            None => {
                self.problems.push(format!("{section}.{key}: expected true or false, got {v}"));
                None
            }
        }
    }

    fn choice(&mut self, section: &str, key: &str) -> Option<&'static str> {
        let Kind::Choice(options) = Self::kind(section, key) else {
            unreachable!()
        };
        let v = self.raw(section, key)?;
        match v.as_str().and_then(|s| options.iter().find(|o| **o == s)) {
            Some(o) => Some(o),
            None => {
                self.problems.push(format!(
                    "{section}.{key}: expected one of {}, got {v}",
                    options.join(", ")
                ));
                None
            }
        }
    }

    fn present(&self, section: &str, key: &str) -> bool {
        self.raw(section, key).is_some()
    }

    fn check<T>(&mut self, what: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.problems.push(format!("{what}: {e}"));
                None
            }
        }
    }

    fn build(&mut self) -> RunConfig {
        let source = self.source();
        let delta_lambda = self.quantity("source", "delta_lambda");
        let link = self.link();
        let covariance = self.covariance();
        let detector = self.detector();
        let sampler = SamplerConfig {
            n: self.integer("sampler", "n").unwrap_or(82_000) as usize,
            seed: self.integer("sampler", "seed").unwrap_or(1),
        };
        if sampler.n == 0 {
            self.problems.push("sampler.n must be at least 1".into());
        }
        let fit = self.fit();
        let herald = self.herald();
        let landscape = self.landscape();
        RunConfig {
            source,
            delta_lambda,
            link,
            covariance,
            detector,
            sampler,
            fit,
            herald,
            landscape,
        }
    }

    fn source(&mut self) -> Option<SourceSpec> {
        if !self.has_section("source") {
            return None;
        }
        let widths_form = self.present("source", "sigma");
        let rho_form = self.present("source", "sigma0") || self.present("source", "rho");
        let pump_given = self.present("source", "tau_p") || self.present("source", "cw");
        match (widths_form, rho_form) {
            (true, true) => {
                self.problems.push(
                    "source: give either sigma with tau_p/cw, or sigma0 with rho, not both".into(),
                );
                None
            }
            (false, false) => {
                if pump_given {
                    self.problems.push("source: tau_p/cw given without sigma".into());
                } else if !self.present("source", "delta_lambda") {
                    self.problems
                        .push("source: need sigma with tau_p/cw, or sigma0 with rho".into());
                }
                None
            }
            (true, false) => {
                let sigma = self.quantity("source", "sigma");
                let cw = self.boolean("source", "cw").unwrap_or(false);
                let tau_p = self.quantity("source", "tau_p");
                let pump_ok = match (cw, self.present("source", "tau_p")) {
                    (true, true) => {
                        self.problems.push("source: tau_p and cw = true are mutually exclusive".into());
                        false
                    }
                    (false, false) => {
                        self.problems.push("source: need tau_p or cw = true".into());
                        false
                    }
                    _ => true,
                };
                let sigma = sigma?;
                if !pump_ok {
                    return None;
                }
                let p = if cw {
                    SourceParams::continuous_wave(sigma)
                } else {
                    SourceParams::pulsed(sigma, tau_p?)
                };
                self.check("source", p).map(SourceSpec::Widths)
            }
            (false, true) => {
                if pump_given {
                    self.problems
                        .push("source: tau_p/cw cannot be combined with sigma0/rho".into());
                }
                let s0 = self.quantity("source", "sigma0");
                let rho = self.quantity("source", "rho");
                if s0.is_none() && !self.present("source", "sigma0") {
                    self.problems.push("source: rho needs sigma0".into());
                }
                if rho.is_none() && !self.present("source", "rho") {
                    self.problems.push("source: sigma0 needs rho".into());
                }
                let p = SourceParamsRho::new(s0?, rho?);
                self.check("source", p).map(SourceSpec::Correlation)
            }
        }
    }

    fn link(&mut self) -> Option<LinkParams> {
        if !self.has_section("link") {
            return None;
        }
        let beta = self.quantity("link", "beta");
        let two_beta = self.quantity("link", "two_beta");
        let length = self.quantity("link", "length");
        let both = self.present("link", "beta") && self.present("link", "two_beta");
        let neither = !self.present("link", "beta") && !self.present("link", "two_beta");
        if both {
            self.problems.push("link: give exactly one of beta and two_beta".into());
        }
        if neither {
            self.problems.push("link: need beta or two_beta".into());
        }
        if !self.present("link", "length") {
            self.problems.push("link: need length".into());
        }
        if both || neither {
            return None;
        }
        let length = length?;
        let l = match (beta, two_beta) {
            (Some(b), _) => LinkParams::new(b, length),
            (_, Some(tb)) => LinkParams::from_two_beta(tb, length),
            _ => return None,
        };
        self.check("link", l)
    }

    fn covariance(&mut self) -> Option<TemporalCovariance> {
        if !self.has_section("covariance") {
            return None;
        }
        for k in ["rho_t", "tau1", "tau2"] {
            if !self.present("covariance", k) {
                self.problems.push(format!("covariance: need {k}"));
            }
        }
        let rho = self.quantity("covariance", "rho_t");
        let t1 = self.quantity("covariance", "tau1");
        let t2 = self.quantity("covariance", "tau2");
        let mu1 = self.quantity("covariance", "mu1").unwrap_or(0.0);
        let mu2 = self.quantity("covariance", "mu2").unwrap_or(0.0);
        let c = TemporalCovariance::with_centroids(rho?, t1?, t2?, mu1, mu2);
        self.check("covariance", c)
    }

    fn detector(&mut self) -> DetectorModel {
        let d = DetectorModel {
            jitter1: self.quantity("detector", "jitter1").unwrap_or(0.0),
            jitter2: self.quantity("detector", "jitter2").unwrap_or(0.0),
            reference_jitter: self.quantity("detector", "reference_jitter").unwrap_or(0.0),
            background_rate: self.quantity("detector", "background_rate").unwrap_or(0.0),
            window: self.range("detector", "window"),
        };
        self.check("detector", d.validate());
        d
    }

    fn fit(&mut self) -> FitSection {
        let def = FitConfig::default();
        let explicit = (self.present("fit", "range_t1"), self.present("fit", "range_t2"));
        let quantiles = self.present("fit", "quantile_lower") || self.present("fit", "quantile_upper");
        let range = match explicit {
            (false, false) => {
                let (dl, du) = match def.range {
                    RangePolicy::Quantile { lower, upper } => (lower, upper),
                    RangePolicy::Explicit { .. } => unreachable!(),
                };
                RangePolicy::Quantile {
                    lower: self.quantity("fit", "quantile_lower").unwrap_or(dl),
                    upper: self.quantity("fit", "quantile_upper").unwrap_or(du),
                }
            }
            (true, true) => {
                if quantiles {
                    self.problems
                        .push("fit: explicit range_t1/range_t2 cannot be combined with quantiles".into());
                }
                match (self.range("fit", "range_t1"), self.range("fit", "range_t2")) {
                    (Some(t1), Some(t2)) => RangePolicy::Explicit { t1, t2 },
                    _ => def.range,
                }
            }
            _ => {
                self.problems.push("fit: range_t1 and range_t2 must be given together".into());
                def.range
            }
        };
        let cfg = FitConfig {
            bins1: self.integer("fit", "bins1").map_or(def.bins1, |v| v as usize),
            bins2: self.integer("fit", "bins2").map_or(def.bins2, |v| v as usize),
            range,
            loss: match self.choice("fit", "loss") {
                Some("maximum-likelihood") => Loss::MaximumLikelihood,
                Some(_) => Loss::HistogramLeastSquares,
                None => def.loss,
            },
            weighting: match self.choice("fit", "weighting") {
                Some("observed") => BinWeighting::Observed,
                Some(_) => BinWeighting::Model,
                None => def.weighting,
            },
            max_iterations: self.integer("fit", "max_iterations").map_or(def.max_iterations, |v| v as usize),
            tolerance: self.quantity("fit", "tolerance").unwrap_or(def.tolerance),
        };
        if let Err(Error::Config(p)) = cfg.validate() {
            self.problems.extend(p.into_iter().map(|m| format!("fit: {m}")));
        }
        let bootstrap = self.integer("fit", "bootstrap").unwrap_or(0) as usize;
        if bootstrap == 1 {
            self.problems.push("fit.bootstrap must be 0 or at least 2".into());
        }
        FitSection { config: cfg, bootstrap }
    }

    fn herald(&mut self) -> HeraldConfig {
        let direction = match self.choice("herald", "direction") {
            Some("on-one") => HeraldDirection::OnOne,
            _ => HeraldDirection::OnTwo,
        };
        let center = self.quantity("herald", "center").unwrap_or(0.0);
        let width = self.quantity("herald", "width").unwrap_or(100e-12);
        if !(width > 0.0) {
            self.problems.push(format!("herald.width must be positive, got {width:e}"));
        }
        let (wlo, whi) = self.range("herald", "widths").unwrap_or((1e-12, 1e-8));
        let wn = self.integer("herald", "width_points").unwrap_or(41) as usize;
        let widths = match LogGrid::new(wlo, whi, wn) {
            Ok(g) if wn >= 3 => g,
            _ => {
                self.problems
                    .push("herald: widths must be positive with width_points >= 3".into());
                LogGrid { lo: 1e-12, hi: 1e-8, points: 41 }
            }
        };
        let centers = self.range("herald", "centers").unwrap_or((-1e-9, 1e-9));
        let center_points = self.integer("herald", "center_points").unwrap_or(21) as usize;
        if center_points < 3 {
            self.problems.push("herald.center_points must be at least 3".into());
        }
        HeraldConfig {
            direction,
            center,
            width,
            widths,
            centers,
            center_points: center_points.max(3),
        }
    }

    fn landscape(&mut self) -> LandscapeConfig {
        let which = match self.choice("landscape", "which") {
            Some("all") | None => vec![WidthKind::Tau1, WidthKind::Tau1h0, WidthKind::Tau1hDt0],
            Some(s) => vec![WidthKind::parse(s).expect("choices are valid names")],
        };
        let mut grid = |key: &str, points: &str, default: (f64, f64)| {
            let (lo, hi) = self.range("landscape", key).unwrap_or(default);
            let n = self.integer("landscape", points).unwrap_or(121) as usize;
            match LogGrid::new(lo, hi, n) {
                Ok(g) if n >= 2 => g,
                _ => {
                    self.problems
                        .push(format!("landscape.{key}: need a positive range and {points} >= 2"));
                    LogGrid { lo: default.0, hi: default.1, points: 121 }
                }
            }
        };
        let tau_p = grid("tau_p", "tau_p_points", (1e-14, 1e-10));
        let sigma = grid("sigma", "sigma_points", (1e10, 1e14));
        LandscapeConfig { which, tau_p, sigma }
    }
}
