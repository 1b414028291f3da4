//! Exact half-integer angular momenta.
//!
//! Quantum numbers are stored as doubled integers (`twice = 2j`), so
//! half-integers like 3/2 are represented exactly and selection rules reduce
//! to integer parity checks instead of floating-point comparisons.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

/// An angular-momentum quantum number `j` or projection `m`, stored as `2j`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    /// Build from a doubled value: `from_twice(3)` is 3/2.
    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    /// Build from a plain integer.
    pub const fn from_int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn as_f64(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub const fn is_integral(self) -> bool {
        self.twice % 2 == 0
    }

    /// Valid as a magnitude, i.e. `j >= 0`.
    pub const fn is_magnitude(self) -> bool {
        self.twice >= 0
    }

    /// Checks `|m| <= j` and that `j - m` is integral.
    pub const fn is_valid_pair(j: HalfInt, m: HalfInt) -> bool {
        j.is_magnitude() && m.twice.abs() <= j.twice && (j.twice - m.twice) % 2 == 0
    }

    /// Multiplicity `2j + 1`.
    pub const fn multiplicity(self) -> i32 {
        self.twice + 1
    }

    /// Iterate the projections `-j, -j+1, ..., +j`.
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        (-self.twice..=self.twice)
            .step_by(2)
            .map(HalfInt::from_twice)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses `"2"`, `"-1/2"`, `"3/2"`, and exact decimals like `"1.5"`.
impl FromStr for HalfInt {
    type Err = ParseHalfIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = || ParseHalfIntError(s.to_owned());
        if let Some((num, den)) = s.split_once('/') {
            if den.trim() != "2" {
                return Err(err());
            }
            let n: i32 = num.trim().parse().map_err(|_| err())?;
            return Ok(HalfInt::from_twice(n));
        }
        if let Some((int, frac)) = s.split_once('.') {
            let sign = if s.starts_with('-') { -1 } else { 1 };
            let whole: i32 = if int.is_empty() || int == "-" {
                0
            } else {
                int.parse().map_err(|_| err())?
            };
            return match frac {
                "5" => Ok(HalfInt::from_twice(2 * whole + sign)),
                "0" | "" => Ok(HalfInt::from_int(whole)),
                _ => Err(err()),
            };
        }
        let n: i32 = s.parse().map_err(|_| err())?;
        Ok(HalfInt::from_int(n))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse `{0}` as a half-integer (use forms like 2, -1, 3/2, -1/2)")]
pub struct ParseHalfIntError(pub String);

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice + rhs.twice)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt::from_twice(self.twice - rhs.twice)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt::from_twice(-self.twice)
    }
}
