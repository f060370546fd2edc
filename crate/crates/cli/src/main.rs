//! `pairtime` command-line interface.

mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pairtime::analytic::{self, OptimumReport};
use pairtime::config::{keys_help, RunConfig};
use pairtime::fit::{self, bootstrap_std_errors, FitResult};
use pairtime::herald::{self, HeraldWindow};
use pairtime::io::{self, FitReport, ReportInputs, Table};
use pairtime::reproduce::{self, Options, Recipe};
use pairtime::sampler::{self, EventSet};
use pairtime::Error;
use serde_json::json;
use svg::{Axis, Series};

#[derive(Parser)]
#[command(name = "pairtime", version, about = "Arrival-time statistics of dispersed photon pairs")]
#[command(after_help = keys_help())]
struct Cli {
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Override a configuration key, e.g. `--set link.length="10 km"`
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Random seed (overrides sampler.seed)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Format of tables and of the stdout summary
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also render SVG plots next to the tables
    #[arg(long, global = true)]
    svg: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Draw synthetic coincidence events
    Simulate {
        /// Time unit of the written file
        #[arg(long, default_value = "s")]
        unit: String,
    },
    /// Fit the joint-Gaussian model to an event file
    Fit { events: PathBuf },
    /// Heralded narrowing and centroid curves, from events or from the model
    Herald { events: Option<PathBuf> },
    /// Pump duration and phase-matching width minimising the temporal widths
    Optimize,
    /// Width landscapes over (tau_p, sigma)
    Landscape,
    /// Regenerate a published table or figure and check it against stored targets
    Reproduce {
        #[arg(value_parser = ["table1", "fig3a", "fig3b", "fig4", "fig5", "all"])]
        name: String,
    },
}

/// Process exit codes.
const EXIT_CHECKS_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_IO: u8 = 4;

struct Failure {
    code: u8,
    kind: &'static str,
    messages: Vec<String>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Config(_) | Error::InvalidParameter(_) => (EXIT_CONFIG, "config"),
            Error::Divergent(_) | Error::Degenerate(_) | Error::TooFewEvents { .. } | Error::NonFinite(_) => {
                (EXIT_NUMERIC, "numerical")
            }
            Error::Parse { .. } | Error::Io { .. } | Error::Serialize(_) => (EXIT_IO, "io"),
        };
        let messages = match e {
            Error::Config(list) => list,
            other => vec![other.to_string()],
        };
        Failure { code, kind, messages }
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let doc = json!({ "error": { "kind": f.kind, "exit_code": f.code, "messages": f.messages } });
            eprintln!("{doc}");
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure {
                code: EXIT_CONFIG,
                kind: "config",
                messages: vec![format!("--threads: {e}")],
            })?;
    }
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p, &cli.overrides)?,
        None => RunConfig::parse("", &cli.overrides)?,
    };
    if let Some(s) = cli.seed {
        cfg.sampler.seed = s;
    }
    let ctx = Ctx { cli, cfg };
    match &cli.command {
        Command::Simulate { unit } => ctx.simulate(unit),
        Command::Fit { events } => ctx.fit(events),
        Command::Herald { events } => ctx.herald(events.as_deref()),
        Command::Optimize => ctx.optimize(),
        Command::Landscape => ctx.landscape(),
        Command::Reproduce { name } => ctx.reproduce(name),
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    cfg: RunConfig,
}

impl Ctx<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.cli.out.join(name)
    }

    fn json(&self) -> bool {
        self.cli.format == Format::Json
    }

    /// Writes `table` as `<stem>.csv` or `<stem>.json` and returns the path.
    fn write_table(&self, dir: &Path, stem: &str, table: &Table) -> Result<PathBuf, Failure> {
        let (path, text) = if self.json() {
            let doc = json!({ "columns": table.columns, "rows": table.rows.iter().map(|r| r.iter().map(|v| finite_or_string(*v)).collect::<Vec<_>>()).collect::<Vec<_>>() });
            (dir.join(format!("{stem}.json")), format!("{doc:#}\n"))
        } else {
            (dir.join(format!("{stem}.csv")), table.to_csv()?)
        };
        io::write_text(&path, &text)?;
        Ok(path)
    }

    fn write_svg(&self, dir: &Path, stem: &str, body: String) -> Result<(), Failure> {
        if self.cli.svg {
            io::write_text(&dir.join(format!("{stem}.svg")), &body)?;
        }
        Ok(())
    }

    fn simulate(&self, unit: &str) -> Outcome {
        let cov = self.cfg.covariance()?;
        let s = &self.cfg.sampler;
        let mut set = sampler::sample(&cov, &self.cfg.detector, s.n, s.seed)?;
        if let Ok(src) = self.cfg.source_params() {
            set = set.with_number("sigma", src.sigma);
            if let Some(t) = src.tau_p() {
                set = set.with_number("tau_p", t);
            }
        }
        if let Some(l) = self.cfg.link {
            set = set.with_number("beta", l.beta).with_number("length", l.length);
        }
        if let Some(d) = self.cfg.delta_lambda {
            set = set.with_number("delta_lambda", d);
        }
        let path = self.path("events.csv");
        io::write_events(&set, &path, unit)?;
        if self.json() {
            println!("{}", json!({ "events": path, "count": set.len(), "seed": s.seed }));
        } else {
            println!("wrote {} events to {}", set.len(), path.display());
        }
        Ok(0)
    }

    fn fit_events(&self, set: &EventSet) -> Result<FitResult, Failure> {
        let mut r = fit::fit(set, &self.cfg.fit.config)?;
        if self.cfg.fit.bootstrap > 0 {
            r.std_errors = Some(bootstrap_std_errors(set, &self.cfg.fit.config, self.cfg.fit.bootstrap, self.cfg.sampler.seed)?);
        }
        Ok(r)
    }

    fn fit(&self, events: &Path) -> Outcome {
        let set = io::read_events(events)?;
        let r = self.fit_events(&set)?;
        let mut inputs = ReportInputs::from_metadata(&set.metadata);
        inputs.delta_lambda = inputs.delta_lambda.or(self.cfg.delta_lambda);
        let report = FitReport::new(&r, inputs);
        let text = report.to_json()?;
        let path = self.path("fit_report.json");
        io::write_text(&path, &text)?;
        if self.json() {
            print!("{text}");
        } else {
            print_fit(&report);
            println!("report: {}", path.display());
        }
        Ok(if r.converged { 0 } else { EXIT_NUMERIC })
    }

    fn herald(&self, events: Option<&Path>) -> Outcome {
        let h = &self.cfg.herald;
        let mut widths = h.width_grid();
        let mut centers = h.center_grid();
        let dir = self.cli.out.clone();
        let (narrow, centroid, reference) = match events {
            Some(p) => {
                let set = io::read_events(p)?;
                let reference = self.fit_events(&set)?.cov;
                widths = populated(&set, &widths, |dt| HeraldWindow::new(h.center, dt, h.direction), "width")?;
                centers = populated(&set, &centers, |c| HeraldWindow::new(c, h.width, h.direction), "center")?;
                let n = herald::narrowing_curve_events(&set, &reference, h.center, &widths, h.direction)?;
                let c = herald::centroid_curve_events(&set, h.width, &centers, h.direction)?;
                (n, c, reference)
            }
            None => {
                let cov = self.cfg.covariance()?;
                let n = herald::narrowing_curve_model(&cov, h.center, &widths, h.direction)?;
                let c = herald::centroid_curve_model(&cov, h.width, &centers, h.direction)?;
                (n, c, cov)
            }
        };
        let model = herald::narrowing_curve_model(&reference, h.center, &widths, h.direction)?;
        let mut t = Table::new(&["dt", "ratio", "std_error", "model_ratio", "asymptote"]);
        for (p, m) in narrow.points.iter().zip(&model.points) {
            t.push(vec![p.dt, p.ratio, p.std_error, m.ratio, narrow.asymptote]);
        }
        let mut c = Table::new(&["center", "mean", "std_error"]);
        for p in &centroid {
            c.push(vec![p.center, p.mean, p.std_error]);
        }
        let a = self.write_table(&dir, "narrowing", &t)?;
        let b = self.write_table(&dir, "centroid", &c)?;
        let (slope, intercept, _) = herald::centroid_slope(&centroid);
        self.write_svg(
            &dir,
            "narrowing",
            svg::line_plot(
                "heralded width ratio",
                Axis { label: "window width dT (s)", log: true },
                Axis { label: "tau1h / tau1", log: false },
                &[
                    Series {
                        name: "ratio".into(),
                        points: narrow.points.iter().map(|p| (p.dt, p.ratio)).collect(),
                    },
                    Series {
                        name: "asymptote".into(),
                        points: narrow.points.iter().map(|p| (p.dt, narrow.asymptote)).collect(),
                    },
                ],
            ),
        )?;
        self.write_svg(
            &dir,
            "centroid",
            svg::line_plot(
                "heralded centroid",
                Axis { label: "window center (s)", log: false },
                Axis { label: "mean t (s)", log: false },
                &[Series {
                    name: h.direction.name().into(),
                    points: centroid.iter().map(|p| (p.center, p.mean)).collect(),
                }],
            ),
        )?;
        if self.json() {
            println!(
                "{}",
                json!({ "narrowing": a, "centroid": b, "asymptote": narrow.asymptote, "centroid_slope": slope, "centroid_intercept": intercept })
            );
        } else {
            println!("asymptote sqrt(1 - rho_t^2) = {:.5}", narrow.asymptote);
            println!("centroid slope = {slope:.5}, intercept = {intercept:.4e} s");
            println!("tables: {}, {}", a.display(), b.display());
        }
        Ok(0)
    }

    fn optimize(&self) -> Outcome {
        let link = self.cfg.link_params()?;
        let sigma = match &self.cfg.source {
            Some(s) => Some(s.params()?.sigma),
            None => None,
        };
        let o = analytic::optimum(sigma, &link)?;
        let text = io::to_json_checked(&o)?;
        let path = self.path("optimum.json");
        io::write_text(&path, &text)?;
        if self.json() {
            print!("{text}");
        } else {
            print_optimum(&o, sigma.is_some());
        }
        Ok(0)
    }

    fn landscape(&self) -> Outcome {
        let link = self.cfg.link_params()?;
        let l = &self.cfg.landscape;
        let dir = self.cli.out.clone();
        for &which in &l.which {
            let m = analytic::landscape(&l.tau_p, &l.sigma, &link, which)?;
            let mut t = Table::new(&["sigma", "tau_p", which.name()]);
            for (r, &s) in m.sigma.iter().enumerate() {
                for (c, &tp) in m.tau_p.iter().enumerate() {
                    t.push(vec![s, tp, m.get(r, c)]);
                }
            }
            let stem = format!("landscape_{}", which.name());
            let p = self.write_table(&dir, &stem, &t)?;
            self.write_svg(
                &dir,
                &stem,
                svg::heatmap(
                    &format!("log10 {} (s)", which.name()),
                    Axis { label: "tau_p (s)", log: true },
                    Axis { label: "sigma (1/s)", log: true },
                    &m.tau_p,
                    &m.sigma,
                    &m.values,
                ),
            )?;
            let (r, c) = m.argmin();
            if self.json() {
                println!(
                    "{}",
                    json!({ "which": which.name(), "table": p, "argmin": { "tau_p": m.tau_p[c], "sigma": m.sigma[r], "value": m.get(r, c) } })
                );
            } else {
                println!(
                    "{}: minimum {:.4e} s at tau_p = {:.4e} s, sigma = {:.4e} /s -> {}",
                    which.name(),
                    m.get(r, c),
                    m.tau_p[c],
                    m.sigma[r],
                    p.display()
                );
            }
        }
        Ok(0)
    }

    fn reproduce(&self, name: &str) -> Outcome {
        let recipes: Vec<Recipe> = match name {
            "all" => Recipe::ALL.to_vec(),
            n => vec![Recipe::parse(n).expect("validated by clap")],
        };
        let opts = Options {
            n: self.cfg.sampler.n,
            seed: self.cfg.sampler.seed,
            fit: self.cfg.fit.config,
        };
        let mut all_pass = true;
        let mut summaries = Vec::new();
        for recipe in recipes {
            let b = reproduce::run(recipe, &opts)?;
            let dir = self.cli.out.join(recipe.name());
            for (file, table) in &b.tables {
                let stem = file.trim_end_matches(".csv");
                self.write_table(&dir, stem, table)?;
                if let Some(body) = figure(recipe, stem, table) {
                    self.write_svg(&dir, stem, body)?;
                }
            }
            for (file, text) in &b.documents {
                io::write_text(&dir.join(file), text)?;
            }
            let summary = b.summary();
            io::write_text(&dir.join("summary.txt"), &summary)?;
            all_pass &= b.passed();
            if self.json() {
                summaries.push(json!({
                    "recipe": recipe.name(),
                    "passed": b.passed(),
                    "checks": b.outcomes.iter().map(|o| json!({
                        "name": o.check.name,
                        "passed": o.passed,
                        "measured": o.measured.map(|m| m.value),
                        "measured_error": o.measured.and_then(|m| m.error),
                        "target": o.check.target,
                    })).collect::<Vec<_>>(),
                }));
            } else {
                print!("{summary}");
            }
        }
        if self.json() {
            println!("{}", serde_json::Value::Array(summaries));
        }
        Ok(if all_pass { 0 } else { EXIT_CHECKS_FAILED })
    }
}

/// Grid points whose window selects enough events; the rest are reported on stderr.
fn populated(
    set: &EventSet,
    grid: &[f64],
    window: impl Fn(f64) -> pairtime::Result<HeraldWindow>,
    what: &str,
) -> Result<Vec<f64>, Failure> {
    let mut kept = Vec::with_capacity(grid.len());
    for &v in grid {
        let n = herald::select(set, &window(v)?).len();
        if n >= herald::MIN_SELECTED {
            kept.push(v);
        } else {
            eprintln!("warning: skipping window {what} {v:e}: {n} events selected, need {}", herald::MIN_SELECTED);
        }
    }
    Ok(kept)
}

fn finite_or_string(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

/// SVG for the tables of a reproduction recipe that have an obvious plot.
fn figure(recipe: Recipe, stem: &str, t: &Table) -> Option<String> {
    let x = t.column(&t.columns[0])?;
    let series = |cols: &[String]| -> Vec<Series> {
        cols.iter()
            .filter_map(|c| {
                let y = t.column(c)?;
                Some(Series {
                    name: c.clone(),
                    points: x.iter().copied().zip(y).collect(),
                })
            })
            .collect()
    };
    let rest: Vec<String> = t.columns[1..].to_vec();
    match (recipe, stem) {
        (Recipe::Fig3a, _) => Some(svg::line_plot(
            stem,
            Axis { label: &t.columns[0], log: true },
            Axis { label: "ratio", log: false },
            &series(&rest),
        )),
        (Recipe::Fig3b, _) => Some(svg::line_plot(
            stem,
            Axis { label: &t.columns[0], log: false },
            Axis { label: "mean (s)", log: false },
            &series(&rest),
        )),
        (Recipe::Fig4, _) => Some(svg::line_plot(
            stem,
            Axis { label: &t.columns[0], log: true },
            Axis { label: "width (s)", log: true },
            &series(&rest),
        )),
        (Recipe::Fig5, "fig5_landscape") => {
            let sigma = t.column("sigma")?;
            let nx = sigma.iter().take_while(|&&s| s == sigma[0]).count();
            let xs = x[..nx].to_vec();
            let ys: Vec<f64> = sigma.iter().step_by(nx).copied().collect();
            let z: Vec<f64> = t.column("log10_tau1h_0")?.iter().map(|v| 10f64.powf(*v)).collect();
            Some(svg::heatmap(
                "tau1h_0 (s)",
                Axis { label: "tau_p (s)", log: true },
                Axis { label: "sigma (1/s)", log: true },
                &xs,
                &ys,
                &z,
            ))
        }
        _ => None,
    }
}

/// `v` rounded to three significant figures.
fn sig3(v: f64) -> String {
    let digits = 2 - v.abs().log10().floor() as i32;
    format!("{:.*}", digits.max(0) as usize, v)
}

fn print_optimum(o: &OptimumReport, fixed_sigma: bool) {
    println!("tau_p_opt  = {} ps", sig3(o.tau_p_opt * 1e12));
    println!("sigma_opt  = {} GHz  ({:.4e} /s)", sig3(o.sigma_opt * 1e-9), o.sigma_opt);
    println!("tau1_abs   = {} ps", sig3(o.tau1_abs * 1e12));
    println!("tau1h_abs  = {} ps", sig3(o.tau1h_abs * 1e12));
    println!("tau_abs    = {} ps  (heralded, finite window, unknown emission time)", sig3(o.tau1h_dt_abs * 1e12));
    if fixed_sigma {
        println!("at sigma = {:.4e} /s:", o.sigma);
        println!("  rho_opt    = {:.4}", o.rho_opt);
        println!("  tau1_min   = {} ps", sig3(o.tau1_min * 1e12));
        println!("  tau1h_min  = {} ps", sig3(o.tau1h_min * 1e12));
        println!("  tau1h_dt   = {} ps", sig3(o.tau1h_dt * 1e12));
    }
}

fn print_fit(r: &FitReport) {
    let line = |name: &str, v: &io::Value, scale: f64, unit: &str| match v.std_error {
        Some(e) => println!("{name:<17} {:.6} ± {:.6} {unit}", v.value * scale, e * scale),
        None => println!("{name:<17} {:.6} {unit}", v.value * scale),
    };
    line("rho_t", &r.rho_t, 1.0, "");
    line("tau1", &r.tau1, 1e9, "ns");
    line("tau2", &r.tau2, 1e9, "ns");
    line("mu1", &r.mu1, 1e9, "ns");
    line("mu2", &r.mu2, 1e9, "ns");
    line("tau1h/tau1", &r.ratio, 1.0, "");
    line("amplitude", &r.amplitude, 1.0, "");
    line("background_level", &r.background_level, 1.0, "");
    if let Some(c) = r.reduced_chi_squared {
        println!("{:<17} {c:.4}", "reduced chi2");
    }
    println!(
        "converged={} iterations={} degenerate_signal={} events_used={}",
        r.converged, r.iterations, r.degenerate_signal, r.events_used
    );
}
