//! Canned reproduction recipes with stored targets.
//!
//! Each recipe regenerates one published table or figure from the model (and,
//! where the original used measured data, from synthetic data drawn at the
//! published parameters), writes plot-ready tables and evaluates the checks
//! stored in `data/targets.toml`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analytic::{self, LogGrid, WidthKind};
use crate::error::{Error, Result};
use crate::fit::{self, FitConfig};
use crate::herald::{self, HeraldDirection};
use crate::io::{FitReport, ReportInputs, Table};
use crate::model::{LinkParams, SourceParams, TemporalCovariance};
use crate::sampler::{self, DetectorModel};
use crate::units::{parse_quantity, Dimension};

pub const TARGETS_TOML: &str = include_str!("../data/targets.toml");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Quoted in the source publication.
    Published,
    /// Derived from published numbers or an internal consistency requirement.
    Computed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Relative,
    Absolute,
    AtMost,
    AtLeast,
    Sigma,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub recipe: String,
    pub name: String,
    pub mode: Mode,
    pub target: f64,
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Uncertainty of the target, for [`Mode::Sigma`].
    #[serde(default)]
    pub error: Option<f64>,
    pub provenance: Provenance,
    #[serde(default)]
    pub note: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSet {
    name: String,
    delta_lambda: String,
    tau_p: String,
    rho_t: f64,
    rho_t_error: f64,
    tau1: String,
    tau2: String,
    ratio: f64,
    ratio_error: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLink {
    beta: String,
    length: String,
    sigma: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTargets {
    version: u32,
    sets: Vec<RawSet>,
    link: RawLink,
    checks: Vec<Check>,
}

/// One published parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct PublishedSet {
    pub name: String,
    pub delta_lambda: f64,
    pub tau_p: f64,
    pub cov: TemporalCovariance,
    pub rho_t_error: f64,
    pub ratio: f64,
    pub ratio_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Targets {
    pub sets: Vec<PublishedSet>,
    pub link: LinkParams,
    /// Phase-matching width of the source used for the pump-duration scan.
    pub sigma: f64,
    pub checks: Vec<Check>,
}

pub fn targets() -> Result<Targets> {
    parse_targets(TARGETS_TOML)
}

pub fn parse_targets(text: &str) -> Result<Targets> {
    let raw: RawTargets = toml::from_str(text).map_err(|e| Error::Config(vec![format!("targets: {e}")]))?;
    if raw.version != 1 {
        return Err(Error::Config(vec![format!("targets: unsupported version {}", raw.version)]));
    }
    let sets = raw
        .sets
        .into_iter()
        .map(|s| {
            Ok(PublishedSet {
                cov: TemporalCovariance::new(
                    s.rho_t,
                    parse_quantity(&s.tau1, Dimension::Time)?,
                    parse_quantity(&s.tau2, Dimension::Time)?,
                )?,
                name: s.name,
                delta_lambda: parse_quantity(&s.delta_lambda, Dimension::Wavelength)?,
                tau_p: parse_quantity(&s.tau_p, Dimension::Time)?,
                rho_t_error: s.rho_t_error,
                ratio: s.ratio,
                ratio_error: s.ratio_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let link = LinkParams::new(
        parse_quantity(&raw.link.beta, Dimension::Dispersion)?,
        parse_quantity(&raw.link.length, Dimension::Length)?,
    )?;
    let sigma = parse_quantity(&raw.link.sigma, Dimension::Rate)?;
    for c in &raw.checks {
        if Recipe::parse(&c.recipe).is_none() {
            return Err(Error::Config(vec![format!("targets: unknown recipe {:?}", c.recipe)]));
        }
        let needs_tol = matches!(c.mode, Mode::Relative | Mode::Absolute | Mode::Sigma);
        if needs_tol && c.tolerance.is_none() {
            return Err(Error::Config(vec![format!("targets: {} needs a tolerance", c.name)]));
        }
        if c.mode == Mode::Sigma && c.error.is_none() {
            return Err(Error::Config(vec![format!("targets: {} needs an error", c.name)]));
        }
    }
    Ok(Targets {
        sets,
        link,
        sigma,
        checks: raw.checks,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    Table1,
    Fig3a,
    Fig3b,
    Fig4,
    Fig5,
}

impl Recipe {
    pub const ALL: [Recipe; 5] = [Recipe::Table1, Recipe::Fig3a, Recipe::Fig3b, Recipe::Fig4, Recipe::Fig5];

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == s)
    }

    pub fn name(self) -> &'static str {
        match self {
            Recipe::Table1 => "table1",
            Recipe::Fig3a => "fig3a",
            Recipe::Fig3b => "fig3b",
            Recipe::Fig4 => "fig4",
            Recipe::Fig5 => "fig5",
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Options {
    /// Events per synthetic data set.
    pub n: usize,
    pub seed: u64,
    pub fit: FitConfig,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            n: 82_000,
            seed: 1,
            fit: FitConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub value: f64,
    pub error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub check: Check,
    pub measured: Option<Measurement>,
    pub passed: bool,
}

impl Outcome {
    pub fn evaluate(check: &Check, measured: Option<Measurement>) -> Self {
        let passed = measured.is_some_and(|m| {
            let d = (m.value - check.target).abs();
            let tol = check.tolerance.unwrap_or(0.0);
            match check.mode {
                Mode::Relative => d <= tol * check.target.abs(),
                Mode::Absolute => d <= tol,
                Mode::AtMost => m.value <= check.target,
                Mode::AtLeast => m.value >= check.target,
                Mode::Sigma => {
                    let e = check.error.unwrap_or(0.0);
                    d <= tol * (e * e + m.error.unwrap_or(0.0).powi(2)).sqrt()
                }
            }
        });
        Self {
            check: check.clone(),
            measured,
            passed,
        }
    }

    pub fn line(&self) -> String {
        let c = &self.check;
        let measured = match self.measured {
            Some(Measurement { value, error: Some(e) }) => format!("{value:.6e} ± {e:.2e}"),
            Some(Measurement { value, error: None }) => format!("{value:.6e}"),
            None => "not measured".into(),
        };
        let rule = match c.mode {
            Mode::Relative => format!("{:.6e} ± {}%", c.target, c.tolerance.unwrap_or(0.0) * 100.0),
            Mode::Absolute => format!("{:.6e} ± {:e}", c.target, c.tolerance.unwrap_or(0.0)),
            Mode::AtMost => format!("<= {:e}", c.target),
            Mode::AtLeast => format!(">= {:e}", c.target),
            Mode::Sigma => format!(
                "{} ± {}σ (σ_target = {})",
                c.target,
                c.tolerance.unwrap_or(0.0),
                c.error.unwrap_or(0.0)
            ),
        };
        let prov = match c.provenance {
            Provenance::Published => "published",
            Provenance::Computed => "computed",
        };
        format!(
            "{} {}:{}  measured {}  target {}  [{}]",
            if self.passed { "PASS" } else { "FAIL" },
            c.recipe,
            c.name,
            measured,
            rule,
            prov
        )
    }
}

/// Tables, JSON documents and check outcomes of one recipe run.
#[derive(Clone, Debug, PartialEq)]
pub struct Bundle {
    pub recipe: Recipe,
    pub tables: Vec<(String, Table)>,
    pub documents: Vec<(String, String)>,
    pub outcomes: Vec<Outcome>,
}

impl Bundle {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for o in &self.outcomes {
            s.push_str(&o.line());
            s.push('\n');
        }
        let n_pass = self.outcomes.iter().filter(|o| o.passed).count();
        s.push_str(&format!(
            "{} {}: {}/{} checks passed\n",
            if self.passed() { "PASS" } else { "FAIL" },
            self.recipe,
            n_pass,
            self.outcomes.len()
        ));
        s
    }
}

type Measurements = BTreeMap<String, Measurement>;

fn exact(value: f64) -> Measurement {
    Measurement { value, error: None }
}

pub fn run(recipe: Recipe, opts: &Options) -> Result<Bundle> {
    let t = targets()?;
    let mut tables = Vec::new();
    let mut documents = Vec::new();
    let mut m = Measurements::new();
    match recipe {
        Recipe::Table1 => table1(&t, opts, &mut tables, &mut documents, &mut m)?,
        Recipe::Fig3a => fig3a(&t, opts, &mut tables, &mut m)?,
        Recipe::Fig3b => fig3b(&t, &mut tables, &mut m)?,
        Recipe::Fig4 => fig4(&t, &mut tables, &mut m)?,
        Recipe::Fig5 => fig5(&t, &mut tables, &mut m)?,
    }
    let outcomes = t
        .checks
        .iter()
        .filter(|c| c.recipe == recipe.name())
        .map(|c| Outcome::evaluate(c, m.get(&c.name).copied()))
        .collect();
    Ok(Bundle {
        recipe,
        tables,
        documents,
        outcomes,
    })
}

/// Fit of synthetic data drawn at one published parameter set.
pub fn table1_fit(set: &PublishedSet, index: usize, opts: &Options) -> Result<fit::FitResult> {
    let events = synthetic(set, index, opts)?;
    fit::fit(&events, &opts.fit)
}

fn synthetic(set: &PublishedSet, index: usize, opts: &Options) -> Result<sampler::EventSet> {
    Ok(
        sampler::sample(&set.cov, &DetectorModel::ideal(), opts.n, opts.seed.wrapping_add(index as u64))?
            .with_number("delta_lambda", set.delta_lambda)
            .with_number("tau_p", set.tau_p)
            .with_meta("dataset", &set.name),
    )
}

fn table1(
    t: &Targets,
    opts: &Options,
    tables: &mut Vec<(String, Table)>,
    documents: &mut Vec<(String, String)>,
    m: &mut Measurements,
) -> Result<()> {
    let mut table = Table::new(&[
        "set",
        "delta_lambda",
        "tau_p",
        "rho_t",
        "rho_t_se",
        "tau1",
        "tau1_se",
        "tau2",
        "tau2_se",
        "ratio",
        "ratio_se",
        "published_ratio",
    ]);
    for (i, set) in t.sets.iter().enumerate() {
        let events = synthetic(set, i, opts)?;
        let r = fit::fit(&events, &opts.fit)?;
        let report = FitReport::new(&r, ReportInputs::from_metadata(&events.metadata));
        documents.push((format!("table1_{}_report.json", set.name), report.to_json()?));
        let se = r
            .std_errors
            .ok_or_else(|| Error::Degenerate(format!("{}: fit has no standard errors", set.name)))?;
        let ratio = report.ratio.value;
        let ratio_se = report.ratio.std_error.unwrap_or(f64::NAN);
        table.push(vec![
            (i + 1) as f64,
            set.delta_lambda,
            set.tau_p,
            r.cov.rho_t,
            se.rho_t,
            r.cov.tau1,
            se.tau1,
            r.cov.tau2,
            se.tau2,
            ratio,
            ratio_se,
            set.ratio,
        ]);
        let n = &set.name;
        m.insert(format!("{n}.rho_t_pull"), exact((r.cov.rho_t - set.cov.rho_t).abs() / se.rho_t));
        m.insert(format!("{n}.tau1_pull"), exact((r.cov.tau1 - set.cov.tau1).abs() / se.tau1));
        m.insert(format!("{n}.tau2_pull"), exact((r.cov.tau2 - set.cov.tau2).abs() / se.tau2));
        m.insert(
            format!("{n}.ratio"),
            Measurement {
                value: ratio,
                error: Some(ratio_se),
            },
        );
    }
    tables.push(("table1.csv".into(), table));
    Ok(())
}

/// Window widths for the ratio curves: log-spaced from 1 ps to 10 ns.
pub fn fig3a_widths() -> Vec<f64> {
    LogGrid { lo: 1e-12, hi: 1e-8, points: 81 }.values()
}

fn fig3a(t: &Targets, opts: &Options, tables: &mut Vec<(String, Table)>, m: &mut Measurements) -> Result<()> {
    let widths = fig3a_widths();
    let mut cols = vec!["dt"];
    let names: Vec<String> = t.sets.iter().map(|s| s.name.clone()).collect();
    cols.extend(names.iter().map(String::as_str));
    let mut table = Table::new(&cols);
    let curves = t
        .sets
        .iter()
        .map(|s| herald::narrowing_curve_model(&s.cov, 0.0, &widths, HeraldDirection::OnTwo))
        .collect::<Result<Vec<_>>>()?;
    for (k, &dt) in widths.iter().enumerate() {
        let mut row = vec![dt];
        row.extend(curves.iter().map(|c| c.points[k].ratio));
        table.push(row);
    }
    tables.push(("fig3a_model.csv".into(), table));

    let mut asym = Table::new(&["set", "asymptote"]);
    for (i, c) in curves.iter().enumerate() {
        asym.push(vec![(i + 1) as f64, c.asymptote]);
    }
    tables.push(("fig3a_asymptotes.csv".into(), asym));

    // Threshold behaviour of the first set.
    let s1 = &t.sets[0].cov;
    let up_to_300: Vec<f64> = LogGrid { lo: 1e-13, hi: 300e-12, points: 200 }.values();
    let c = herald::narrowing_curve_model(s1, 0.0, &up_to_300, HeraldDirection::OnTwo)?;
    let worst = c.points.iter().map(|p| p.ratio - c.asymptote).fold(f64::NEG_INFINITY, f64::max);
    m.insert("set1.max_offset_up_to_300ps".into(), exact(worst));
    let at_1ns = herald::narrowing_curve_model(s1, 0.0, &[0.5e-9, 1e-9, 2e-9], HeraldDirection::OnTwo)?;
    m.insert("set1.offset_at_1ns".into(), exact(at_1ns.points[1].ratio - at_1ns.asymptote));

    for s in &t.sets {
        let dt = s.cov.tau2 / 1000.0;
        let c = herald::narrowing_curve_model(&s.cov, 0.0, &[dt, 2.0 * dt, 4.0 * dt], HeraldDirection::OnTwo)?;
        m.insert(format!("{}.limit_offset", s.name), exact((c.points[0].ratio - c.asymptote).abs()));
    }

    // Empirical curve from synthetic data at the third set.
    let (idx, set3) = (2, &t.sets[2]);
    let events = synthetic(set3, idx, opts)?;
    let grid = [50e-12, 100e-12, 200e-12, 300e-12, 500e-12, 1e-9, 2e-9, 5e-9, f64::INFINITY];
    let emp = herald::narrowing_curve_events(&events, &set3.cov, 0.0, &grid, HeraldDirection::OnTwo)?;
    let model = herald::narrowing_curve_model(&set3.cov, 0.0, &grid, HeraldDirection::OnTwo)?;
    let mut et = Table::new(&["dt", "ratio", "std_error", "model"]);
    let mut worst_pull: f64 = 0.0;
    for (e, mo) in emp.points.iter().zip(&model.points) {
        if e.dt.is_finite() {
            et.push(vec![e.dt, e.ratio, e.std_error, mo.ratio]);
            worst_pull = worst_pull.max((e.ratio - mo.ratio).abs() / e.std_error);
        }
    }
    tables.push((format!("fig3a_empirical_{}.csv", set3.name), et));
    m.insert(format!("{}.empirical_max_pull", set3.name), exact(worst_pull));
    Ok(())
}

fn fig3b(t: &Targets, tables: &mut Vec<(String, Table)>, m: &mut Measurements) -> Result<()> {
    for s in &t.sets {
        let centers: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.1 * s.cov.tau2).collect();
        let narrow = herald::centroid_curve_model(&s.cov, s.cov.tau2 / 1000.0, &centers, HeraldDirection::OnTwo)?;
        let wide = herald::centroid_curve_model(&s.cov, 100e-12, &centers, HeraldDirection::OnTwo)?;
        let mut table = Table::new(&["t2", "t1h_narrow", "t1h_100ps"]);
        for (a, b) in narrow.iter().zip(&wide) {
            table.push(vec![a.center, a.mean, b.mean]);
        }
        tables.push((format!("fig3b_{}.csv", s.name), table));
        let (slope, _, _) = herald::centroid_slope(&narrow);
        m.insert(format!("{}.slope", s.name), exact(slope));
    }
    Ok(())
}

fn fig4(t: &Targets, tables: &mut Vec<(String, Table)>, m: &mut Measurements) -> Result<()> {
    let grid = LogGrid { lo: 1e-14, hi: 1e-10, points: 161 }.values();
    let mut table = Table::new(&["tau_p", "tau1", "tau1h_0", "tau1h_dt_0"]);
    for &tau_p in &grid {
        let src = SourceParams::pulsed(t.sigma, tau_p)?;
        table.push(vec![
            tau_p,
            analytic::tau1(&src, &t.link)?,
            analytic::tau1h_0(&src, &t.link),
            analytic::tau1h_dt_0(&src, &t.link),
        ]);
    }
    tables.push(("fig4.csv".into(), table));
    let opt = analytic::optimum(Some(t.sigma), &t.link)?;
    let mut ot = Table::new(&["tau_p_opt", "sigma_opt", "tau1_min", "tau1h_min", "tau1h_dt"]);
    ot.push(vec![opt.tau_p_opt, opt.sigma_opt, opt.tau1_min, opt.tau1h_min, opt.tau1h_dt]);
    tables.push(("fig4_optimum.csv".into(), ot));
    m.insert("tau_p_opt".into(), exact(opt.tau_p_opt));
    m.insert("sigma_opt".into(), exact(opt.sigma_opt));
    m.insert("tau1_abs".into(), exact(opt.tau1_abs));
    m.insert("tau1h_abs".into(), exact(opt.tau1h_abs));
    m.insert("tau1h_dt_abs".into(), exact(opt.tau1h_dt_abs));
    // The ratio of the two curves at the optimum pump duration for this sigma.
    let at_opt = analytic::widths(&SourceParams::pulsed(t.sigma, opt.tau_p_opt)?, &t.link)?;
    m.insert("central_ratio".into(), exact(at_opt.tau1h_0 / at_opt.tau1));
    Ok(())
}

/// Grids of the landscape recipe.
pub fn fig5_grids() -> (LogGrid, LogGrid) {
    (
        LogGrid { lo: 1e-14, hi: 1e-9, points: 201 },
        LogGrid { lo: 1e9, hi: 1e14, points: 201 },
    )
}

fn fig5(t: &Targets, tables: &mut Vec<(String, Table)>, m: &mut Measurements) -> Result<()> {
    let (tg, sg) = fig5_grids();
    let kinds = [WidthKind::Tau1, WidthKind::Tau1h0, WidthKind::Tau1hDt0];
    let maps = kinds
        .iter()
        .map(|&k| analytic::landscape(&tg, &sg, &t.link, k))
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["tau_p", "sigma", "log10_tau1", "log10_tau1h_0", "log10_tau1h_dt_0"]);
    for (r, &s) in maps[0].sigma.iter().enumerate() {
        for (c, &tp) in maps[0].tau_p.iter().enumerate() {
            table.push(vec![
                tp,
                s,
                maps[0].get(r, c).log10(),
                maps[1].get(r, c).log10(),
                maps[2].get(r, c).log10(),
            ]);
        }
    }
    tables.push(("fig5_landscape.csv".into(), table));

    let opt = analytic::optimum(None, &t.link)?;
    let (fc, fr) = (grid_position(&tg, opt.tau_p_opt), grid_position(&sg, opt.sigma_opt));
    for map in &maps[..2] {
        let (r, c) = map.argmin();
        let off = (r as f64 - fr).abs().max((c as f64 - fc).abs());
        m.insert(format!("{}.argmin_offset_cells", map.which.name()), exact(off));
    }
    let variation = (0..maps[2].sigma.len())
        .map(|r| {
            let row = maps[2].row(r);
            let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (hi - lo) / lo
        })
        .fold(0.0, f64::max);
    m.insert("tau1h_dt_0.row_variation".into(), exact(variation));

    let mut loci = Table::new(&["sigma0", "rho", "tau_p", "sigma"]);
    let rhos: Vec<f64> = (-19..=19).map(|k| k as f64 * 0.05).collect();
    for sigma0 in [1e10, 1e11, 1e12, 1e13] {
        for (rho, (tp, s)) in rhos.iter().zip(analytic::constant_bandwidth_locus(sigma0, &rhos)?) {
            loci.push(vec![sigma0, *rho, tp, s]);
        }
    }
    tables.push(("fig5_loci.csv".into(), loci));
    Ok(())
}

/// Fractional index of `x` on a log grid.
fn grid_position(g: &LogGrid, x: f64) -> f64 {
    (x / g.lo).ln() / g.step_ratio().ln()
}
