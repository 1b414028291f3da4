//! Atomic line data: hyperfine structure, dipole matrix element, linewidth.
//!
//! All frequencies are stored as angular frequencies (rad/s). Quantities
//! quoted in Hz-family units are linear frequencies and get multiplied by
//! 2*pi on ingest. Hyperfine offsets are referenced to the manifold centroid
//! (the degeneracy-weighted mean is zero), which together with the magnetic
//! dipole A-coefficient convention fixes every transition frequency
//! unambiguously.
//!
//! The 87Rb D1 line ships built in; other lines load from plain-text data
//! files (see [`AtomicLine::from_data_file`]).

use crate::consts::TWO_PI;
use crate::datafile::{DataFileError, KeyValueFile};
use crate::halfint::HalfInt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AtomError {
    #[error("unknown species/line `{species}/{line}` (built-in: rb87/d1; supply a data file for others)")]
    UnknownLine { species: String, line: String },
    #[error("atomic data file: {0}")]
    Parse(#[from] DataFileError),
    #[error("invalid atomic data: {0}")]
    Invalid(String),
    #[error("no hyperfine level F = {f} in the {manifold} manifold")]
    NoSuchLevel { f: HalfInt, manifold: Manifold },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Manifold {
    Ground,
    Excited,
}

impl std::fmt::Display for Manifold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Manifold::Ground => write!(f, "ground"),
            Manifold::Excited => write!(f, "excited"),
        }
    }
}

/// One hyperfine sublevel `|F, m_F>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HyperfineState {
    pub f: HalfInt,
    pub m_f: HalfInt,
    pub manifold: Manifold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicSpecies {
    pub name: String,
    pub nuclear_spin: HalfInt,
    pub ground_j: HalfInt,
}

/// A transition manifold: reduced dipole element, decay rate, line center,
/// and the hyperfine level ladders on both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicLine {
    pub label: String,
    pub species: AtomicSpecies,
    pub excited_j: HalfInt,
    /// `<J||er||J'>` in C m.
    pub reduced_dipole: f64,
    /// Natural linewidth, rad/s.
    pub linewidth: f64,
    /// Line-center angular frequency, rad/s.
    pub line_center: f64,
    /// `(F, offset)` pairs sorted by F; offsets in rad/s from the centroid.
    pub ground_hyperfine: Vec<(HalfInt, f64)>,
    /// Same for the excited manifold.
    pub excited_hyperfine: Vec<(HalfInt, f64)>,
}

/// Looks up a registered line. `rb87`/`d1` is built in.
pub fn load_line(species: &str, line: &str) -> Result<AtomicLine, AtomError> {
    if species.eq_ignore_ascii_case("rb87") && line.eq_ignore_ascii_case("d1") {
        return Ok(rb87_d1());
    }
    Err(AtomError::UnknownLine {
        species: species.to_owned(),
        line: line.to_owned(),
    })
}

/// The 87Rb D1 line (5s 2S1/2 -> 5p 2P1/2).
///
/// Dipole element 2.5377e-29 C m; Gamma = 2*pi x 5.7500 MHz; line center
/// 2*pi x 377.107463380 THz. Hyperfine offsets follow from the magnetic
/// dipole constants A(5s) = 3.417341305452145 GHz and A(5p1/2) = 407.25 MHz
/// via E(F)/h = A/2 [F(F+1) - I(I+1) - J(J+1)].
pub fn rb87_d1() -> AtomicLine {
    let a_ground = 3.417_341_305_452_145e9; // Hz
    let a_excited = 407.25e6; // Hz
    AtomicLine {
        label: "d1".to_owned(),
        species: AtomicSpecies {
            name: "rb87".to_owned(),
            nuclear_spin: HalfInt::from_twice(3),
            ground_j: HalfInt::HALF,
        },
        excited_j: HalfInt::HALF,
        reduced_dipole: 2.5377e-29,
        linewidth: TWO_PI * 5.7500e6,
        line_center: TWO_PI * 377.107_463_380e12,
        ground_hyperfine: vec![
            (HalfInt::from_int(1), TWO_PI * (-1.25 * a_ground)),
            (HalfInt::from_int(2), TWO_PI * (0.75 * a_ground)),
        ],
        excited_hyperfine: vec![
            (HalfInt::from_int(1), TWO_PI * (-1.25 * a_excited)),
            (HalfInt::from_int(2), TWO_PI * (0.75 * a_excited)),
        ],
    }
}

impl AtomicLine {
    /// Parses a line from the plain-text registry format:
    ///
    /// ```text
    /// nuclear_spin = 3/2
    /// ground_J = 1/2
    /// excited_J = 1/2
    /// reduced_dipole = 2.5377e-29 C·m
    /// linewidth = 5.75 MHz
    /// line_center = 377.107463380 THz
    /// ground_F1_offset = -4.271676631815 GHz
    /// ground_F2_offset = 2.563005979089 GHz
    /// excited_F1_offset = -509.0625 MHz
    /// excited_F2_offset = 305.4375 MHz
    /// ```
    pub fn from_data_file(label: &str, species_name: &str, text: &str) -> Result<Self, AtomError> {
        let file = KeyValueFile::parse(text)?;
        let require = |key: &str| DataFileError::MissingKey(key.to_owned());

        let nuclear_spin = file
            .get_half_int("nuclear_spin")?
            .ok_or_else(|| require("nuclear_spin"))?;
        let ground_j = file.get_half_int("ground_J")?.ok_or_else(|| require("ground_J"))?;
        let excited_j = file
            .get_half_int("excited_J")?
            .ok_or_else(|| require("excited_J"))?;
        let reduced_dipole = file
            .get_dipole("reduced_dipole")?
            .ok_or_else(|| require("reduced_dipole"))?;
        let linewidth = file
            .get_angular_frequency("linewidth")?
            .ok_or_else(|| require("linewidth"))?;
        let line_center = file
            .get_angular_frequency("line_center")?
            .ok_or_else(|| require("line_center"))?;

        let mut ground_hyperfine = Vec::new();
        let mut excited_hyperfine = Vec::new();
        for (key, line_no) in file.keys() {
            let (manifold, rest) = if let Some(rest) = key.strip_prefix("ground_F") {
                (Manifold::Ground, rest)
            } else if let Some(rest) = key.strip_prefix("excited_F") {
                (Manifold::Excited, rest)
            } else {
                match key {
                    "nuclear_spin" | "ground_J" | "excited_J" | "reduced_dipole"
                    | "linewidth" | "line_center" => continue,
                    _ => {
                        return Err(AtomError::Parse(DataFileError::UnknownKey {
                            key: key.to_owned(),
                            line: line_no,
                        }))
                    }
                }
            };
            let Some(f_text) = rest.strip_suffix("_offset") else {
                return Err(AtomError::Parse(DataFileError::UnknownKey {
                    key: key.to_owned(),
                    line: line_no,
                }));
            };
            let f: HalfInt = f_text.parse().map_err(|_| {
                AtomError::Parse(DataFileError::UnknownKey {
                    key: key.to_owned(),
                    line: line_no,
                })
            })?;
            let offset = file
                .get_angular_frequency(key)?
                .expect("key iterated from file");
            match manifold {
                Manifold::Ground => ground_hyperfine.push((f, offset)),
                Manifold::Excited => excited_hyperfine.push((f, offset)),
            }
        }
        ground_hyperfine.sort_by_key(|(f, _)| *f);
        excited_hyperfine.sort_by_key(|(f, _)| *f);

        let line = AtomicLine {
            label: label.to_owned(),
            species: AtomicSpecies {
                name: species_name.to_owned(),
                nuclear_spin,
                ground_j,
            },
            excited_j,
            reduced_dipole,
            linewidth,
            line_center,
            ground_hyperfine,
            excited_hyperfine,
        };
        line.validate()?;
        Ok(line)
    }

    /// Serializes to the registry file format (round-trips through
    /// [`AtomicLine::from_data_file`]).
    pub fn to_data_file(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "# {} {} line\nnuclear_spin = {}\nground_J = {}\nexcited_J = {}\n",
            self.species.name, self.label, self.species.nuclear_spin, self.species.ground_j,
            self.excited_j
        ));
        out.push_str(&format!("reduced_dipole = {:e} C·m\n", self.reduced_dipole));
        out.push_str(&format!("linewidth = {} rad/s\n", self.linewidth));
        out.push_str(&format!("line_center = {} rad/s\n", self.line_center));
        for (f, off) in &self.ground_hyperfine {
            out.push_str(&format!("ground_F{f}_offset = {off} rad/s\n"));
        }
        for (f, off) in &self.excited_hyperfine {
            out.push_str(&format!("excited_F{f}_offset = {off} rad/s\n"));
        }
        out
    }

    pub fn validate(&self) -> Result<(), AtomError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.reduced_dipole) {
            return Err(AtomError::Invalid("reduced_dipole must be > 0".into()));
        }
        if !positive(self.linewidth) {
            return Err(AtomError::Invalid("linewidth must be > 0".into()));
        }
        if !positive(self.line_center) {
            return Err(AtomError::Invalid("line_center must be > 0".into()));
        }
        let i = self.species.nuclear_spin;
        for (j, levels, name) in [
            (self.species.ground_j, &self.ground_hyperfine, "ground"),
            (self.excited_j, &self.excited_hyperfine, "excited"),
        ] {
            if levels.is_empty() {
                return Err(AtomError::Invalid(format!("{name} manifold is empty")));
            }
            let f_min = HalfInt::from_twice((j.twice() - i.twice()).abs());
            let f_max = j + i;
            let mut mult_sum = 0;
            let mut prev: Option<HalfInt> = None;
            let mut weighted = 0.0;
            let mut span: f64 = 1.0;
            for &(f, off) in levels {
                if f < f_min || f > f_max {
                    return Err(AtomError::Invalid(format!(
                        "{name} F = {f} outside |J - I| ..= J + I = {f_min} ..= {f_max}"
                    )));
                }
                if prev.is_some_and(|p| f <= p) {
                    return Err(AtomError::Invalid(format!(
                        "{name} manifold levels must be sorted by ascending F"
                    )));
                }
                prev = Some(f);
                mult_sum += f.multiplicity();
                weighted += f.multiplicity() as f64 * off;
                span = span.max(off.abs());
            }
            let expected = j.multiplicity() * i.multiplicity();
            if mult_sum != expected {
                return Err(AtomError::Invalid(format!(
                    "{name} manifold multiplicities sum to {mult_sum}, expected (2J+1)(2I+1) = {expected}"
                )));
            }
            if weighted.abs() > 1e-6 * span {
                return Err(AtomError::Invalid(format!(
                    "{name} manifold offsets are not centroid-referenced (weighted mean {weighted:.3e} rad/s)"
                )));
            }
        }
        Ok(())
    }

    fn offset(&self, manifold: Manifold, f: HalfInt) -> Result<f64, AtomError> {
        let levels = match manifold {
            Manifold::Ground => &self.ground_hyperfine,
            Manifold::Excited => &self.excited_hyperfine,
        };
        levels
            .iter()
            .find(|(lf, _)| *lf == f)
            .map(|(_, off)| *off)
            .ok_or(AtomError::NoSuchLevel { f, manifold })
    }

    /// Transition angular frequency `omega_FF' = center + off_e(F') - off_g(F)`.
    pub fn transition_frequency(&self, f: HalfInt, f_prime: HalfInt) -> Result<f64, AtomError> {
        let og = self.offset(Manifold::Ground, f)?;
        let oe = self.offset(Manifold::Excited, f_prime)?;
        Ok(self.line_center + oe - og)
    }

    /// All `|F, m_F>` sublevels of a manifold, ordered by (F asc, m_F asc).
    pub fn enumerate_states(&self, manifold: Manifold) -> Vec<HyperfineState> {
        let levels = match manifold {
            Manifold::Ground => &self.ground_hyperfine,
            Manifold::Excited => &self.excited_hyperfine,
        };
        let mut out = Vec::new();
        for &(f, _) in levels {
            for m_f in f.projections() {
                out.push(HyperfineState { f, m_f, manifold });
            }
        }
        out
    }

    /// Ground-state hyperfine splitting between the lowest and highest F, rad/s.
    pub fn ground_splitting(&self) -> f64 {
        let lo = self.ground_hyperfine.first().map(|&(_, o)| o).unwrap_or(0.0);
        let hi = self.ground_hyperfine.last().map(|&(_, o)| o).unwrap_or(0.0);
        hi - lo
    }

    /// Largest spread of `omega_FF'` values around the line center, rad/s.
    pub fn hyperfine_span(&self) -> f64 {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for &(_, og) in &self.ground_hyperfine {
            for &(_, oe) in &self.excited_hyperfine {
                let d = oe - og;
                min = min.min(d);
                max = max.max(d);
            }
        }
        max - min
    }
}
