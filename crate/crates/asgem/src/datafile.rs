//! Flat `key = value unit` text files.
//!
//! One parser serves both the atomic-line registry and the CLI config /
//! manifest files: UTF-8 text, `#` comments, one `key = value [unit]` entry
//! per line. Frequency units are linear (Hz family) and are converted to
//! angular rad/s on ingest; `rad/s` values pass through unchanged.

use std::collections::BTreeMap;

use crate::consts::TWO_PI;
use crate::halfint::HalfInt;

/// A parsed `key = value unit` file, keys in file order.
#[derive(Debug, Clone, Default)]
pub struct KeyValueFile {
    entries: Vec<(String, RawValue, usize)>,
}

/// The right-hand side of an entry, split into number and unit token.
#[derive(Debug, Clone)]
pub struct RawValue {
    pub text: String,
    pub unit: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DataFileError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: cannot parse `{text}` as a number for key `{key}`")]
    BadNumber { line: usize, key: String, text: String },
    #[error("line {line}: unknown unit `{unit}` for key `{key}` (expected one of {expected})")]
    BadUnit { line: usize, key: String, unit: String, expected: String },
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("unknown key `{key}` (line {line})")]
    UnknownKey { key: String, line: usize },
}

impl KeyValueFile {
    pub fn parse(text: &str) -> Result<Self, DataFileError> {
        let mut entries: Vec<(String, RawValue, usize)> = Vec::new();
        let mut seen = BTreeMap::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw_line.split_once('#') {
                Some((head, _)) => head,
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, rhs) = line.split_once('=').ok_or_else(|| DataFileError::Syntax {
                line: line_no,
                text: raw_line.trim().to_owned(),
            })?;
            let key = key.trim().to_owned();
            if key.is_empty() {
                return Err(DataFileError::Syntax {
                    line: line_no,
                    text: raw_line.trim().to_owned(),
                });
            }
            if seen.insert(key.clone(), line_no).is_some() {
                return Err(DataFileError::DuplicateKey { line: line_no, key });
            }
            let rhs = rhs.trim();
            let (num, unit) = split_number_unit(rhs);
            entries.push((
                key,
                RawValue {
                    text: num.to_owned(),
                    unit: if unit.is_empty() {
                        None
                    } else {
                        Some(unit.to_owned())
                    },
                },
                line_no,
            ));
        }
        Ok(KeyValueFile { entries })
    }

    pub fn keys(&self) -> impl Iterator<Item = (&str, usize)> {
        self.entries.iter().map(|(k, _, line)| (k.as_str(), *line))
    }

    pub fn get(&self, key: &str) -> Option<(&RawValue, usize)> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, line)| (v, *line))
    }

    /// Angular frequency in rad/s; accepts Hz-family units (converted by
    /// 2*pi) and `rad/s` (taken as-is).
    pub fn get_angular_frequency(&self, key: &str) -> Result<Option<f64>, DataFileError> {
        let Some((raw, line)) = self.get(key) else {
            return Ok(None);
        };
        let value = parse_number(&raw.text, key, line)?;
        let unit = raw.unit.as_deref().unwrap_or("Hz");
        let factor = frequency_unit_to_rad_s(unit).ok_or_else(|| DataFileError::BadUnit {
            line,
            key: key.to_owned(),
            unit: unit.to_owned(),
            expected: "Hz, kHz, MHz, GHz, THz, rad/s".to_owned(),
        })?;
        Ok(Some(value * factor))
    }

    /// Length in metres; accepts `nm`, `um`, `mm`, `m`.
    pub fn get_length(&self, key: &str) -> Result<Option<f64>, DataFileError> {
        let Some((raw, line)) = self.get(key) else {
            return Ok(None);
        };
        let value = parse_number(&raw.text, key, line)?;
        let unit = raw.unit.as_deref().unwrap_or("m");
        let factor = length_unit_to_m(unit).ok_or_else(|| DataFileError::BadUnit {
            line,
            key: key.to_owned(),
            unit: unit.to_owned(),
            expected: "nm, um, mm, m".to_owned(),
        })?;
        Ok(Some(value * factor))
    }

    /// Electric dipole moment in C m (unit spellings `C·m`, `C.m`, `C*m`, `Cm`).
    pub fn get_dipole(&self, key: &str) -> Result<Option<f64>, DataFileError> {
        let Some((raw, line)) = self.get(key) else {
            return Ok(None);
        };
        let value = parse_number(&raw.text, key, line)?;
        match raw.unit.as_deref() {
            None | Some("C·m") | Some("C.m") | Some("C*m") | Some("Cm") => Ok(Some(value)),
            Some(other) => Err(DataFileError::BadUnit {
                line,
                key: key.to_owned(),
                unit: other.to_owned(),
                expected: "C·m".to_owned(),
            }),
        }
    }

    /// Dimensionless number (unit token, if any, must be `tau` or empty).
    pub fn get_number(&self, key: &str) -> Result<Option<f64>, DataFileError> {
        let Some((raw, line)) = self.get(key) else {
            return Ok(None);
        };
        match raw.unit.as_deref() {
            None | Some("tau") => {}
            Some(other) => {
                return Err(DataFileError::BadUnit {
                    line,
                    key: key.to_owned(),
                    unit: other.to_owned(),
                    expected: "(dimensionless) or tau".to_owned(),
                })
            }
        }
        Ok(Some(parse_number(&raw.text, key, line)?))
    }

    /// Half-integer like `3/2`.
    pub fn get_half_int(&self, key: &str) -> Result<Option<HalfInt>, DataFileError> {
        let Some((raw, line)) = self.get(key) else {
            return Ok(None);
        };
        let text = match &raw.unit {
            Some(unit) => format!("{}{}", raw.text, unit),
            None => raw.text.clone(),
        };
        text.parse().map(Some).map_err(|_| DataFileError::BadNumber {
            line,
            key: key.to_owned(),
            text,
        })
    }

    /// Bare string value (number field plus unit field re-joined).
    pub fn get_string(&self, key: &str) -> Option<String> {
        self.get(key).map(|(raw, _)| match &raw.unit {
            Some(unit) if raw.text.is_empty() => unit.clone(),
            Some(unit) => format!("{} {}", raw.text, unit),
            None => raw.text.clone(),
        })
    }
}

fn parse_number(text: &str, key: &str, line: usize) -> Result<f64, DataFileError> {
    text.parse().map_err(|_| DataFileError::BadNumber {
        line,
        key: key.to_owned(),
        text: text.to_owned(),
    })
}

/// Splits `1064nm` or `5.75 MHz` into number text and unit text.
pub fn split_number_unit(s: &str) -> (&str, &str) {
    let s = s.trim();
    let mut split = s.len();
    for (i, c) in s.char_indices() {
        let numeric = c.is_ascii_digit()
            || c == '.'
            || c == '-'
            || c == '+'
            || c == '/'
            || ((c == 'e' || c == 'E')
                && s[i + c.len_utf8()..]
                    .chars()
                    .next()
                    .is_some_and(|n| n.is_ascii_digit() || n == '-' || n == '+'));
        if !numeric {
            split = i;
            break;
        }
    }
    (s[..split].trim(), s[split..].trim())
}

/// Conversion factor to rad/s for a frequency unit token.
pub fn frequency_unit_to_rad_s(unit: &str) -> Option<f64> {
    match unit {
        "Hz" => Some(TWO_PI),
        "kHz" => Some(TWO_PI * 1e3),
        "MHz" => Some(TWO_PI * 1e6),
        "GHz" => Some(TWO_PI * 1e9),
        "THz" => Some(TWO_PI * 1e12),
        "rad/s" => Some(1.0),
        _ => None,
    }
}

/// Conversion factor to metres for a length unit token.
pub fn length_unit_to_m(unit: &str) -> Option<f64> {
    match unit {
        "nm" => Some(1e-9),
        "um" | "µm" => Some(1e-6),
        "mm" => Some(1e-3),
        "m" => Some(1.0),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_units_and_comments() {
        let f = KeyValueFile::parse(
            "# comment\nlinewidth = 5.75 MHz\nwavelength = 1064nm # inline\nxi = 2500\nspin = 3/2\n",
        )
        .unwrap();
        let w = f.get_angular_frequency("linewidth").unwrap().unwrap();
        assert!((w - TWO_PI * 5.75e6).abs() < 1.0);
        assert_eq!(f.get_length("wavelength").unwrap().unwrap(), 1.064e-6);
        assert_eq!(f.get_number("xi").unwrap().unwrap(), 2500.0);
        assert_eq!(
            f.get_half_int("spin").unwrap().unwrap(),
            HalfInt::from_twice(3)
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = KeyValueFile::parse("a = 1\nbroken line\n").unwrap_err();
        assert_eq!(
            err,
            DataFileError::Syntax {
                line: 2,
                text: "broken line".into()
            }
        );
        let f = KeyValueFile::parse("freq = 5 parsec\n").unwrap();
        match f.get_angular_frequency("freq").unwrap_err() {
            DataFileError::BadUnit { line, unit, .. } => {
                assert_eq!(line, 1);
                assert_eq!(unit, "parsec");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_keys_rejected() {
        assert!(matches!(
            KeyValueFile::parse("a = 1\na = 2\n"),
            Err(DataFileError::DuplicateKey { line: 2, .. })
        ));
    }

    #[test]
    fn number_unit_split() {
        assert_eq!(split_number_unit("1064nm"), ("1064", "nm"));
        assert_eq!(split_number_unit("5e13"), ("5e13", ""));
        assert_eq!(split_number_unit("5e13 W/m2"), ("5e13", "W/m2"));
        assert_eq!(split_number_unit("-4.2717 GHz"), ("-4.2717", "GHz"));
        assert_eq!(split_number_unit("2.5377e-29 C·m"), ("2.5377e-29", "C·m"));
        assert_eq!(split_number_unit("3/2"), ("3/2", ""));
    }
}
