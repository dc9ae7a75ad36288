//! Unit conversions and unit-suffixed quantity strings. Everything inside
//! the crate works in SI units; logarithmic units and suffixes only appear
//! at the configuration boundary.

use crate::error::{Error, Result};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

fn pow10(exp: f64) -> f64 {
    // integral exponents go through powi so that e.g. 20 dBm is exactly 0.1 W
    if exp.fract() == 0.0 && exp.abs() <= 22.0 {
        let n = exp as i32;
        if n >= 0 {
            10f64.powi(n)
        } else {
            1.0 / 10f64.powi(-n)
        }
    } else {
        10f64.powf(exp)
    }
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    pow10((dbm - 30.0) / 10.0)
}

pub fn w_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

/// Noise spectral density: dBm/Hz to W/Hz.
pub fn dbm_per_hz_to_w_per_hz(dbm_hz: f64) -> f64 {
    dbm_to_w(dbm_hz)
}

pub fn db_to_linear(db: f64) -> f64 {
    pow10(db / 10.0)
}

/// Physical dimension of a configuration quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Power,
    Energy,
    Time,
    Frequency,
    Psd,
    Distance,
    Velocity,
    /// Decibel offsets, kept in dB.
    Decibel,
}

impl Dim {
    fn si_unit(self) -> &'static str {
        match self {
            Dim::Power => "W",
            Dim::Energy => "J",
            Dim::Time => "s",
            Dim::Frequency => "Hz",
            Dim::Psd => "W/Hz",
            Dim::Distance => "m",
            Dim::Velocity => "m/s",
            Dim::Decibel => "dB",
        }
    }

    fn scale(self, unit: &str) -> Option<f64> {
        let table: &[(&str, f64)] = match self {
            Dim::Power => &[("W", 1.0), ("mW", 1e-3), ("kW", 1e3)],
            Dim::Energy => &[("J", 1.0), ("mJ", 1e-3), ("kJ", 1e3)],
            Dim::Time => &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9)],
            Dim::Frequency => &[("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)],
            Dim::Psd => &[("W/Hz", 1.0)],
            Dim::Distance => &[("m", 1.0), ("km", 1e3)],
            Dim::Velocity => &[("m/s", 1.0)],
            Dim::Decibel => &[("dB", 1.0)],
        };
        table.iter().find(|(u, _)| *u == unit).map(|(_, s)| *s)
    }
}

/// Parses `"<number> <unit>"` (space optional) into SI units.
///
/// Powers accept `dBm` and spectral densities `dBm/Hz` besides the linear
/// units.
pub fn parse_quantity(text: &str, dim: Dim) -> Result<f64> {
    let s = text.trim();
    let split = s
        .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
        .ok_or_else(|| Error::Config(format!("missing unit in {text:?}, expected {}", dim.si_unit())))?;
    // "1e-3W" has its exponent before the unit, "5 mW" has none
    let (num, unit) = s.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad number in {text:?}")))?;
    if !value.is_finite() {
        return Err(Error::Config(format!("non-finite quantity {text:?}")));
    }
    let unit = unit.trim();
    let si = match (dim, unit) {
        (Dim::Power, "dBm") | (Dim::Psd, "dBm/Hz") => dbm_to_w(value),
        _ => match dim.scale(unit) {
            Some(scale) => value * scale,
            None => {
                return Err(Error::Config(format!(
                    "unit {unit:?} in {text:?} is not a {dim:?} unit"
                )))
            }
        },
    };
    Ok(si)
}

/// Formats an SI value with the SI unit; re-parses to the same bits.
pub fn format_quantity(value: f64, dim: Dim) -> String {
    let a = value.abs();
    if a == 0.0 || (1e-3..1e15).contains(&a) {
        format!("{value} {}", dim.si_unit())
    } else {
        format!("{value:e} {}", dim.si_unit())
    }
}

macro_rules! quantity_serde {
    ($name:ident, $dim:expr) => {
        pub mod $name {
            use serde::{Deserialize, Deserializer, Serializer};

            pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(&super::format_quantity(*v, $dim))
            }

            pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
                let text = String::deserialize(d)?;
                super::parse_quantity(&text, $dim).map_err(serde::de::Error::custom)
            }
        }
    };
}

quantity_serde!(power, super::Dim::Power);
quantity_serde!(energy, super::Dim::Energy);
quantity_serde!(time, super::Dim::Time);
quantity_serde!(frequency, super::Dim::Frequency);
quantity_serde!(psd, super::Dim::Psd);
quantity_serde!(distance, super::Dim::Distance);
quantity_serde!(velocity, super::Dim::Velocity);
quantity_serde!(decibel, super::Dim::Decibel);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_conversions() {
        assert_eq!(dbm_to_w(20.0), 0.1);
        assert_eq!(dbm_to_w(30.0), 1.0);
        let n0 = dbm_per_hz_to_w_per_hz(-174.0);
        assert!((n0 / 10f64.powf(-20.4) - 1.0).abs() < 1e-12);
        assert!((w_to_dbm(1.0) - 30.0).abs() < 1e-12);
        assert_eq!(db_to_linear(-10.0), 0.1);
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_quantity("20 dBm", Dim::Power).unwrap(), 0.1);
        assert_eq!(parse_quantity("0.1 W", Dim::Power).unwrap(), 0.1);
        assert_eq!(parse_quantity("100mW", Dim::Power).unwrap(), 0.1);
        assert_eq!(parse_quantity("0.5 MHz", Dim::Frequency).unwrap(), 0.5e6);
        assert_eq!(parse_quantity("1500 J", Dim::Energy).unwrap(), 1500.0);
        assert_eq!(parse_quantity("1e-3 s", Dim::Time).unwrap(), 1e-3);
        assert_eq!(parse_quantity("2e-9W/Hz", Dim::Psd).unwrap(), 2e-9);
        assert_eq!(
            parse_quantity("-174 dBm/Hz", Dim::Psd).unwrap(),
            dbm_per_hz_to_w_per_hz(-174.0)
        );
        assert_eq!(parse_quantity("0.5 km", Dim::Distance).unwrap(), 500.0);
        assert_eq!(parse_quantity("-3 dB", Dim::Decibel).unwrap(), -3.0);
    }

    #[test]
    fn parse_rejects() {
        for (t, d) in [
            ("20", Dim::Power),
            ("20 J", Dim::Power),
            ("abc W", Dim::Power),
            ("20 dBm", Dim::Energy),
            ("inf W", Dim::Power),
        ] {
            assert!(parse_quantity(t, d).is_err(), "{t}");
        }
    }

    proptest! {
        #[test]
        fn format_round_trips(v in proptest::num::f64::NORMAL) {
            for dim in [Dim::Power, Dim::Psd, Dim::Time, Dim::Decibel] {
                let back = parse_quantity(&format_quantity(v, dim), dim).unwrap();
                prop_assert_eq!(back.to_bits(), v.to_bits());
            }
        }
    }
}
