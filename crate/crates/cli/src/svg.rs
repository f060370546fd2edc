//! Minimal static SVG line plots and heatmaps.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Copy)]
pub struct Axis<'a> {
    pub label: &'a str,
    pub log: bool,
}

fn extent(values: impl Iterator<Item = f64>, log: bool) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite() && (!log || *v > 0.0))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let (lo, hi) = if log { (lo.log10(), hi.log10()) } else { (lo, hi) };
    if !(lo.is_finite() && hi.is_finite()) {
        return (0.0, 1.0);
    }
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = write!(out, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(out: &mut String, x: Axis, y: Axis, xr: (f64, f64), yr: (f64, f64)) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = write!(
        out,
        r#"<path d="M{x0} {y1}V{y0}H{x1}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = xr.0 + f * (xr.1 - xr.0);
        let yv = yr.0 + f * (yr.1 - yr.0);
        let px = x0 + f * (x1 - x0);
        let py = y0 + f * (y1 - y0);
        let _ = write!(
            out,
            r#"<text x="{px}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 16.0,
            tick(xv, x.log)
        );
        let _ = write!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            py + 4.0,
            tick(yv, y.log)
        );
    }
    let _ = write!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 12.0,
        escape(x.label)
    );
    let _ = write!(
        out,
        r#"<text transform="translate(16 {}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        escape(y.label)
    );
}

fn tick(v: f64, log: bool) -> String {
    if log {
        format!("{:.2e}", 10f64.powf(v))
    } else {
        format!("{v:.3}")
    }
}

pub fn line_plot(title: &str, x: Axis, y: Axis, series: &[Series]) -> String {
    let xr = extent(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)), x.log);
    let yr = extent(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)), y.log);
    let map = |v: f64, log: bool, r: (f64, f64), a: f64, b: f64| {
        let v = if log { v.log10() } else { v };
        a + (v - r.0) / (r.1 - r.0) * (b - a)
    };
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, x, y, xr, yr);
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for &(px, py) in &s.points {
            if !(px.is_finite() && py.is_finite()) || (x.log && px <= 0.0) || (y.log && py <= 0.0) {
                continue;
            }
            let cmd = if d.is_empty() { 'M' } else { 'L' };
            let _ = write!(
                d,
                "{cmd}{:.2} {:.2}",
                map(px, x.log, xr, LEFT, W - RIGHT),
                map(py, y.log, yr, H - BOTTOM, TOP)
            );
        }
        let _ = write!(out, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
        let _ = write!(
            out,
            r#"<text x="{}" y="{}" fill="{color}" text-anchor="end">{}</text>"#,
            W - RIGHT - 4.0,
            TOP + 14.0 * (i as f64 + 1.0),
            escape(&s.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Heatmap of `values[row * xs.len() + col]`, colored by log10 of the value.
pub fn heatmap(title: &str, x: Axis, y: Axis, xs: &[f64], ys: &[f64], values: &[f64]) -> String {
    let xr = extent(xs.iter().copied(), x.log);
    let yr = extent(ys.iter().copied(), y.log);
    let logs: Vec<f64> = values.iter().map(|v| v.log10()).collect();
    let (lo, hi) = extent(logs.iter().copied(), false);
    let mut out = String::new();
    header(&mut out, title);
    let (nx, ny) = (xs.len(), ys.len());
    let cw = (W - LEFT - RIGHT) / nx as f64;
    let ch = (H - TOP - BOTTOM) / ny as f64;
    for r in 0..ny {
        for c in 0..nx {
            let t = ((logs[r * nx + c] - lo) / (hi - lo)).clamp(0.0, 1.0);
            let _ = write!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                LEFT + c as f64 * cw,
                H - BOTTOM - (r + 1) as f64 * ch,
                cw + 0.3,
                ch + 0.3,
                ramp(t)
            );
        }
    }
    axes(&mut out, x, y, xr, yr);
    out.push_str("</svg>\n");
    out
}

fn ramp(t: f64) -> String {
    let r = (255.0 * t.powf(0.8)) as u8;
    let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs()).max(0.0) * 0.8) as u8;
    let b = (255.0 * (1.0 - t).powf(0.8)) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}
