//! Lengths with explicit unit suffixes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{CasimirError, Result};

/// A length in metres, written in files as `"<number> <unit>"` with unit
/// `nm`, `um` (or `µm`), `mm` or `m`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Length(pub f64);

impl Length {
    pub fn meters(self) -> f64 {
        self.0
    }
}

// divisors, so that "6 nm" parses to exactly 6e-9
const UNITS: [(&str, f64); 5] = [
    ("nm", 1e9),
    ("um", 1e6),
    ("µm", 1e6),
    ("mm", 1e3),
    ("m", 1.0),
];

/// Parse `"6 nm"`, `"2.4um"`, `"1e-7 m"`.
pub fn parse_length(text: &str) -> Result<f64> {
    let t = text.trim();
    let bad = |reason: &str| CasimirError::config("length", format!("{reason} in {text:?}"));
    for (suffix, divisor) in UNITS {
        if let Some(number) = t.strip_suffix(suffix) {
            let number = number.trim_end();
            if number.ends_with(|c: char| c.is_alphabetic() || c == 'µ') {
                continue;
            }
            let v: f64 = number.parse().map_err(|_| bad("invalid number"))?;
            if !v.is_finite() {
                return Err(bad("non-finite value"));
            }
            return Ok(v / divisor);
        }
    }
    Err(bad("missing unit suffix (nm, um, mm or m)"))
}

impl FromStr for Length {
    type Err = CasimirError;

    fn from_str(s: &str) -> Result<Self> {
        parse_length(s).map(Length)
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.0;
        let a = v.abs();
        if a >= 1e-3 || a == 0.0 {
            write!(f, "{v} m")
        } else if a >= 1e-6 {
            write!(f, "{} um", v * 1e6)
        } else {
            write!(f, "{} nm", v * 1e9)
        }
    }
}

impl Serialize for Length {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Length {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_length(&text).map(Length).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes() {
        assert_eq!(parse_length("6 nm").unwrap(), 6e-9);
        assert_eq!(parse_length("2.4um").unwrap(), 2.4e-6);
        assert_eq!(parse_length("15 µm").unwrap(), 15e-6);
        assert_eq!(parse_length("1e-7 m").unwrap(), 1e-7);
        assert_eq!(parse_length("3 mm").unwrap(), 3e-3);
    }

    #[test]
    fn rejects_missing_or_unknown_units() {
        for bad in ["6", "6 km", "nm", "x nm", "6 pm"] {
            assert!(parse_length(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn display_round_trips() {
        for v in [6e-9, 2.4e-6, 0.5] {
            let l = Length(v);
            let back: Length = l.to_string().parse().unwrap();
            assert!((back.0 / v - 1.0).abs() < 1e-15);
        }
    }
}
