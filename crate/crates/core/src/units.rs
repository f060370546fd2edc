//! Unit-suffixed quantities.
//!
//! Everything inside the crate is SI: seconds, metres, s²/m for group-velocity
//! dispersion and 1/s for spectral widths. Frequency-like prefixes (`GHz`,
//! `THz`) are taken as plain multiples of 1/s, i.e. the same "formula units"
//! the width expressions are written in; no factor of 2π is applied.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dimension {
    Time,
    Length,
    /// Group-velocity dispersion coefficient, s²/m.
    Dispersion,
    /// Spectral width in 1/s.
    Rate,
    /// Wavelength interval, stored in metres.
    Wavelength,
    Dimensionless,
}

impl Dimension {
    pub fn si_unit(self) -> &'static str {
        match self {
            Dimension::Time => "s",
            Dimension::Length | Dimension::Wavelength => "m",
            Dimension::Dispersion => "s^2/m",
            Dimension::Rate => "1/s",
            Dimension::Dimensionless => "",
        }
    }

    /// Units accepted for this dimension with their factor to SI.
    pub fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Time => TIME_UNITS,
            Dimension::Length => LENGTH_UNITS,
            Dimension::Wavelength => WAVELENGTH_UNITS,
            Dimension::Dispersion => DISPERSION_UNITS,
            Dimension::Rate => RATE_UNITS,
            Dimension::Dimensionless => &[("", 1.0)],
        }
    }

    pub fn factor(self, unit: &str) -> Option<f64> {
        let unit = unit.trim();
        if unit.is_empty() {
            return Some(1.0);
        }
        self.units()
            .iter()
            .find(|(name, _)| *name == unit)
            .map(|&(_, f)| f)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Time => "time",
            Dimension::Length => "length",
            Dimension::Dispersion => "dispersion",
            Dimension::Rate => "spectral width",
            Dimension::Wavelength => "wavelength",
            Dimension::Dimensionless => "dimensionless",
        };
        f.write_str(name)
    }
}

const TIME_UNITS: &[(&str, f64)] = &[
    ("s", 1.0),
    ("ms", 1e-3),
    ("us", 1e-6),
    ("µs", 1e-6),
    ("ns", 1e-9),
    ("ps", 1e-12),
    ("fs", 1e-15),
];

const LENGTH_UNITS: &[(&str, f64)] = &[("m", 1.0), ("km", 1e3), ("cm", 1e-2), ("mm", 1e-3)];

const WAVELENGTH_UNITS: &[(&str, f64)] = &[("m", 1.0), ("um", 1e-6), ("µm", 1e-6), ("nm", 1e-9), ("pm", 1e-12)];

const DISPERSION_UNITS: &[(&str, f64)] = &[
    ("s^2/m", 1.0),
    ("s2/m", 1.0),
    ("ps^2/km", 1e-27),
    ("ps2/km", 1e-27),
    ("fs^2/mm", 1e-27),
    ("fs^2/m", 1e-30),
];

const RATE_UNITS: &[(&str, f64)] = &[
    ("1/s", 1.0),
    ("/s", 1.0),
    ("Hz", 1.0),
    ("kHz", 1e3),
    ("MHz", 1e6),
    ("GHz", 1e9),
    ("THz", 1e12),
];

/// Splits `"964 fs"`, `"964fs"` or `"-2.27e-26 s^2/m"` into number and unit.
fn split_quantity(text: &str) -> (&str, &str) {
    let text = text.trim();
    let bytes = text.as_bytes();
    let mut end = 0;
    while end < bytes.len() {
        let c = bytes[end] as char;
        let exponent = (c == 'e' || c == 'E')
            && end > 0
            && bytes[end - 1].is_ascii_digit()
            && bytes
                .get(end + 1)
                .is_some_and(|&n| n.is_ascii_digit() || n == b'-' || n == b'+');
        if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' || exponent {
            end += 1;
        } else {
            break;
        }
    }
    (&text[..end], text[end..].trim())
}

/// Parses a quantity string into SI units.
/// Shortest exact decimal form of `v`, in scientific notation outside `[1e-3, 1e6)`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-3..1e6).contains(&a) || !a.is_finite() {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

pub fn parse_quantity(text: &str, dim: Dimension) -> Result<f64> {
    let (number, unit) = split_quantity(text);
    let value: f64 = number
        .parse()
        .map_err(|_| Error::invalid(format!("'{text}' is not a number with a unit")))?;
    let factor = dim.factor(unit).ok_or_else(|| {
        let known: Vec<&str> = dim.units().iter().map(|(u, _)| *u).collect();
        Error::invalid(format!(
            "unknown {dim} unit '{unit}' in '{text}' (expected one of: {})",
            known.join(", ")
        ))
    })?;
    if !value.is_finite() {
        return Err(Error::NonFinite(text.to_string()));
    }
    Ok(value * factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_spaced_and_glued_units() {
        assert_eq!(parse_quantity("964 fs", Dimension::Time).unwrap(), 964.0 * 1e-15);
        assert_eq!(parse_quantity("10km", Dimension::Length).unwrap(), 1e4);
        assert_eq!(
            parse_quantity("-2.27e-26 s^2/m", Dimension::Dispersion).unwrap(),
            -2.27e-26
        );
        assert_eq!(parse_quantity("3.29 THz", Dimension::Rate).unwrap(), 3.29e12);
        assert_eq!(parse_quantity("1e3", Dimension::Length).unwrap(), 1e3);
    }

    #[test]
    fn rejects_wrong_dimension() {
        assert!(parse_quantity("10 km", Dimension::Time).is_err());
        assert!(parse_quantity("fast", Dimension::Time).is_err());
    }
}
