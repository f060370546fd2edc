//! Event files, fit reports and plain CSV tables.
//!
//! Event files are CSV with a `#`-prefixed `key=value` header block:
//!
//! ```text
//! # format=pairtime-events
//! # version=1
//! # units=ps
//! # count=2
//! # seed=42
//! t1,t2
//! 100,-50
//! 12.5,3
//! ```
//!
//! `units` is required; `count`, when present, must match the number of rows.
//! Any other header key is carried through as event-set metadata.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::FitResult;
use crate::sampler::{Event, EventSet};
use crate::units::{format_number, Dimension};

pub const EVENTS_FORMAT: &str = "pairtime-events";
pub const EVENTS_VERSION: u32 = 1;
pub const REPORT_FORMAT: &str = "pairtime-fit-report";

const RESERVED: [&str; 4] = ["format", "version", "units", "count"];

/// Conversion between a time unit and seconds. Sub-second units divide by an
/// exactly representable integer so that `100 ps` reads back as `100 / 1e12`.
#[derive(Clone, Copy, Debug)]
struct TimeScale {
    factor: f64,
    per_second: Option<f64>,
}

impl TimeScale {
    fn of(unit: &str) -> Option<Self> {
        let factor = Dimension::Time.factor(unit)?;
        let inv = (1.0 / factor).round();
        let per_second = (factor < 1.0 && (inv * factor - 1.0).abs() < 1e-12).then_some(inv);
        Some(Self { factor, per_second })
    }

    fn to_seconds(self, v: f64) -> f64 {
        match self.per_second {
            Some(k) => v / k,
            None => v * self.factor,
        }
    }

    fn from_seconds(self, v: f64) -> f64 {
        match self.per_second {
            Some(k) => v * k,
            None => v / self.factor,
        }
    }
}

fn parse_err(path: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_string(),
        line,
        message: message.into(),
    }
}

/// Parses event-file text; `origin` names the source in error messages.
pub fn parse_events(text: &str, origin: &str) -> Result<EventSet> {
    let mut header: BTreeMap<String, String> = BTreeMap::new();
    let mut scale = None;
    let mut declared_count = None;
    let mut events = Vec::new();
    let mut seen_columns = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if seen_columns {
                continue;
            }
            let rest = rest.trim();
            if rest.is_empty() {
                continue;
            }
            let Some((k, v)) = rest.split_once('=') else {
                return Err(parse_err(origin, line_no, format!("header line is not key=value: {rest:?}")));
            };
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(parse_err(origin, line_no, "empty header key"));
            }
            match k {
                "format" if v != EVENTS_FORMAT => {
                    return Err(parse_err(origin, line_no, format!("unsupported format {v:?}")));
                }
                "version" => match v.parse::<u32>() {
                    Ok(EVENTS_VERSION) => {}
                    _ => return Err(parse_err(origin, line_no, format!("unsupported version {v:?}"))),
                },
                "units" => {
                    scale = Some(TimeScale::of(v).ok_or_else(|| {
                        parse_err(origin, line_no, format!("unknown time unit {v:?}"))
                    })?);
                }
                "count" => {
                    declared_count = Some(v.parse::<usize>().map_err(|_| {
                        parse_err(origin, line_no, format!("count is not a non-negative integer: {v:?}"))
                    })?);
                }
                _ => {}
            }
            header.insert(k.to_string(), v.to_string());
            continue;
        }
        if !seen_columns {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols != ["t1", "t2"] {
                return Err(parse_err(origin, line_no, format!("expected column header \"t1,t2\", got {line:?}")));
            }
            if scale.is_none() {
                return Err(parse_err(origin, line_no, "missing units declaration (# units=...)"));
            }
            seen_columns = true;
            continue;
        }
        let s = scale.expect("checked at column header");
        let mut fields = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            let f = fields
                .next()
                .ok_or_else(|| parse_err(origin, line_no, format!("missing field {name}")))?
                .trim();
            let v: f64 = f
                .parse()
                .map_err(|_| parse_err(origin, line_no, format!("field {name} is not a number: {f:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(origin, line_no, format!("field {name} is not finite")));
            }
            Ok(s.to_seconds(v))
        };
        let t1 = next("t1")?;
        let t2 = next("t2")?;
        if fields.next().is_some() {
            return Err(parse_err(origin, line_no, "too many fields, expected 2"));
        }
        events.push(Event { t1, t2 });
    }

    if !seen_columns {
        if scale.is_none() {
            return Err(parse_err(origin, 0, "missing units declaration (# units=...)"));
        }
        if declared_count.unwrap_or(0) != 0 {
            return Err(parse_err(origin, 0, "missing column header \"t1,t2\""));
        }
    }
    if let Some(c) = declared_count {
        if c != events.len() {
            return Err(parse_err(
                origin,
                0,
                format!("header declares {c} events but {} rows were read", events.len()),
            ));
        }
    }
    let metadata = header
        .into_iter()
        .filter(|(k, _)| !RESERVED.contains(&k.as_str()))
        .collect();
    Ok(EventSet { events, metadata })
}

pub fn read_events(path: &Path) -> Result<EventSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_events(&text, &path.display().to_string())
}

/// Serialises events with times expressed in `unit`.
pub fn format_events(set: &EventSet, unit: &str) -> Result<String> {
    let scale = TimeScale::of(unit).ok_or_else(|| Error::invalid(format!("unknown time unit {unit:?}")))?;
    let mut out = String::new();
    writeln!(out, "# format={EVENTS_FORMAT}").unwrap();
    writeln!(out, "# version={EVENTS_VERSION}").unwrap();
    writeln!(out, "# units={unit}").unwrap();
    writeln!(out, "# count={}", set.len()).unwrap();
    for (k, v) in &set.metadata {
        if RESERVED.contains(&k.as_str()) {
            continue;
        }
        let bad = |s: &str| s.contains(['\n', '\r', '=']) || s.trim() != s || s.is_empty();
        if bad(k) || v.contains(['\n', '\r']) || v.trim() != v {
            return Err(Error::invalid(format!("metadata entry {k:?} cannot be written to a header")));
        }
        writeln!(out, "# {k}={v}").unwrap();
    }
    out.push_str("t1,t2\n");
    for e in &set.events {
        if !(e.t1.is_finite() && e.t2.is_finite()) {
            return Err(Error::NonFinite("event time".into()));
        }
        writeln!(out, "{},{}", format_number(scale.from_seconds(e.t1)), format_number(scale.from_seconds(e.t2))).unwrap();
    }
    Ok(out)
}

pub fn write_events(set: &EventSet, path: &Path, unit: &str) -> Result<()> {
    let text = format_events(set, unit)?;
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Value {
    pub value: f64,
    pub std_error: Option<f64>,
}

/// Known source-side inputs, taken from event metadata.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportInputs {
    /// Pump bandwidth (FWHM), m.
    pub delta_lambda: Option<f64>,
    pub tau_p: Option<f64>,
    pub sigma: Option<f64>,
    pub beta: Option<f64>,
    pub length: Option<f64>,
    pub seed: Option<u64>,
}

impl ReportInputs {
    pub fn from_metadata(meta: &BTreeMap<String, String>) -> Self {
        let f = |k: &str| meta.get(k).and_then(|v| v.parse::<f64>().ok());
        Self {
            delta_lambda: f("delta_lambda"),
            tau_p: f("tau_p"),
            sigma: f("sigma"),
            beta: f("beta"),
            length: f("length"),
            seed: meta.get("seed").and_then(|v| v.parse().ok()),
        }
    }
}

/// Fit report; times in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub format: String,
    pub version: u32,
    pub inputs: ReportInputs,
    pub rho_t: Value,
    pub tau1: Value,
    pub tau2: Value,
    pub mu1: Value,
    pub mu2: Value,
    /// Limiting heralded-to-unheralded width ratio `sqrt(1 - rho_t^2)`.
    pub ratio: Value,
    pub amplitude: Value,
    pub background_level: Value,
    pub reduced_chi_squared: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub degenerate_signal: bool,
    pub loss: crate::fit::Loss,
    pub events_used: usize,
}

impl FitReport {
    pub fn new(result: &FitResult, inputs: ReportInputs) -> Self {
        let se = result.std_errors;
        let v = |value: f64, e: Option<f64>| Value { value, std_error: e };
        let rho = result.cov.rho_t;
        let ratio = (1.0 - rho * rho).sqrt();
        Self {
            format: REPORT_FORMAT.into(),
            version: 1,
            inputs,
            rho_t: v(rho, se.map(|s| s.rho_t)),
            tau1: v(result.cov.tau1, se.map(|s| s.tau1)),
            tau2: v(result.cov.tau2, se.map(|s| s.tau2)),
            mu1: v(result.cov.mu1, se.map(|s| s.mu1)),
            mu2: v(result.cov.mu2, se.map(|s| s.mu2)),
            ratio: v(ratio, se.map(|s| rho.abs() / ratio * s.rho_t)),
            amplitude: v(result.amplitude, se.map(|s| s.amplitude)),
            background_level: v(result.background_level, se.map(|s| s.background)),
            reduced_chi_squared: result.reduced_chi_squared,
            converged: result.converged,
            iterations: result.iterations,
            degenerate_signal: result.degenerate_signal,
            loss: result.loss,
            events_used: result.events_used,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let values = [
            ("rho_t", self.rho_t),
            ("tau1", self.tau1),
            ("tau2", self.tau2),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("ratio", self.ratio),
            ("amplitude", self.amplitude),
            ("background_level", self.background_level),
        ];
        for (name, v) in values {
            if !v.value.is_finite() || v.std_error.is_some_and(|e| !e.is_finite()) {
                return Err(Error::NonFinite(format!("report field {name}")));
            }
        }
        if self.reduced_chi_squared.is_some_and(|c| !c.is_finite()) {
            return Err(Error::NonFinite("report field reduced_chi_squared".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Pretty JSON for values without optional fields. serde_json writes
/// non-finite floats as `null`, so any `null` is rejected.
pub fn to_json_checked<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    reject_null(&v, "value")?;
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn reject_null(v: &serde_json::Value, path: &str) -> Result<()> {
    match v {
        serde_json::Value::Null => Err(Error::NonFinite(path.to_string())),
        serde_json::Value::Object(m) => m.iter().try_for_each(|(k, x)| reject_null(x, &format!("{path}.{k}"))),
        serde_json::Value::Array(a) => a
            .iter()
            .enumerate()
            .try_for_each(|(i, x)| reject_null(x, &format!("{path}[{i}]"))),
        _ => Ok(()),
    }
}

pub fn write_report(result: &FitResult, inputs: ReportInputs, path: &Path) -> Result<()> {
    write_text(path, &FitReport::new(result, inputs).to_json()?)
}

/// Plain CSV table with a header row. Infinite values are written as `inf`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = self.columns.join(",");
        out.push('\n');
        for (i, r) in self.rows.iter().enumerate() {
            if r.iter().any(|v| v.is_nan()) {
                return Err(Error::NonFinite(format!("table row {i}")));
            }
            let cells: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn picoseconds_convert_to_seconds() {
        let set = parse_events("# units=ps\nt1,t2\n100,-50\n", "mem").unwrap();
        assert_eq!(set.events, vec![Event { t1: 1e-10, t2: -5e-11 }]);
    }

    #[test]
    fn empty_body() {
        let set = parse_events("# units=ns\n# count=0\nt1,t2\n", "mem").unwrap();
        assert!(set.is_empty());
        let set = parse_events("# units=ns\n", "mem").unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_events("# units=ps\nt1,t2\n1,2\n3,x\n", "f.csv").unwrap_err();
        match e {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 4);
                assert!(message.contains("t2"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_events("# units=parsec\nt1,t2\n", "f").unwrap_err(),
            Error::Parse { line: 1, .. }
        ));
        assert!(matches!(parse_events("t1,t2\n1,2\n", "f").unwrap_err(), Error::Parse { line: 1, .. }));
        assert!(matches!(
            parse_events("# units=s\n# count=3\nt1,t2\n1,2\n", "f").unwrap_err(),
            Error::Parse { .. }
        ));
        assert!(matches!(parse_events("# units=s\nt1,t2\n1,2,3\n", "f").unwrap_err(), Error::Parse { line: 3, .. }));
        assert!(matches!(parse_events("# units=s\nt1,t2\nNaN,2\n", "f").unwrap_err(), Error::Parse { line: 3, .. }));
    }

    #[test]
    fn metadata_survives_round_trip() {
        let set = EventSet::new(vec![Event { t1: 1e-9, t2: 2e-9 }])
            .with_meta("seed", 7)
            .with_meta("sigma", 3.29e12);
        let text = format_events(&set, "ps").unwrap();
        let back = parse_events(&text, "mem").unwrap();
        assert_eq!(back.metadata, set.metadata);
        assert_eq!(format_events(&back, "ps").unwrap(), text);
    }

    #[test]
    fn representable_picoseconds_are_exact() {
        let set = EventSet::new(vec![Event { t1: 100e-12, t2: -50e-12 }, Event { t1: 12.5e-12, t2: 0.0 }]);
        let back = parse_events(&format_events(&set, "ps").unwrap(), "mem").unwrap();
        assert_eq!(back.events, set.events);
    }

    #[test]
    fn nan_is_rejected_in_tables_and_events() {
        let mut t = Table::new(&["a"]);
        t.push(vec![f64::NAN]);
        assert!(t.to_csv().is_err());
        let set = EventSet::new(vec![Event { t1: f64::NAN, t2: 0.0 }]);
        assert!(format_events(&set, "s").is_err());
    }

    proptest! {
        #[test]
        fn seconds_round_trip_is_exact(pairs in prop::collection::vec((-1e-6f64..1e-6, -1e-6f64..1e-6), 0..50)) {
            let set = EventSet::new(pairs.iter().map(|&(t1, t2)| Event { t1, t2 }).collect());
            let back = parse_events(&format_events(&set, "s").unwrap(), "mem").unwrap();
            prop_assert_eq!(back.events, set.events);
        }

        #[test]
        fn reader_never_panics(text in "(#[ a-z=0-9.]{0,12}\n|t1,t2\n|[-0-9.,eE a-z]{0,16}\n){0,8}") {
            let _ = parse_events(&text, "fuzz");
        }

        #[test]
        fn picosecond_round_trip_within_an_ulp(x in -1e-6f64..1e-6) {
            let set = EventSet::new(vec![Event { t1: x, t2: -x }]);
            let back = parse_events(&format_events(&set, "ps").unwrap(), "mem").unwrap();
            prop_assert!((back.events[0].t1 - x).abs() <= 2.0 * f64::EPSILON * x.abs());
        }
    }
}
