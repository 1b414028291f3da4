//! ac Stark shifts, scattering rates, and the memory bandwidth they set.
//!
//! The ground-state light shift of `|F, m_F>` under a far-detuned beam of
//! intensity `I` and spherical polarization `q` is
//!
//! ```text
//! delta(F, m_F) = I |<J||er||J'>|^2 / (2 hbar^2 eps0 c)
//!     * sum over F' of (2F+1)(2F'+1)(2J+1)
//!       {J J' 1; F' F I}^2 (F' 1 F; m_F' -q -m_F)^2 / (omega_l - omega_FF')
//! ```
//!
//! with `m_F' = m_F + q` fixed by the 3j selection rule, reported in rad/s.
//! The scattering rate sums the coherent two-step amplitude over final ground
//! states and scattered polarizations:
//!
//! ```text
//! Gamma_sc = I omega_l^3 / (6 pi eps0^2 hbar^3 c^4)
//!     * sum_f | sum_i <f|d.e_qsc|i><i|d.e_q|g> / (omega_l - omega_gi) |^2
//! ```
//!
//! Counter-rotating `1/(omega_l + omega)` terms are omitted by default and
//! can be switched on for sensitivity studies.

use crate::atom::{AtomicLine, Manifold};
use crate::consts::{C, EPS0, HBAR};
use crate::halfint::HalfInt;
use crate::sweep::{self, AxisSpec, CellOutcome, ContourResult, ParamGrid, SweepError, SweepOptions};
use crate::wigner::{wigner_3j, wigner_6j, AngularError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StarkError {
    #[error("beam at {omega_l:.6e} rad/s is resonant with the F = {f} -> F' = {f_prime} transition at {omega_ffp:.6e} rad/s")]
    Resonant {
        f: HalfInt,
        f_prime: HalfInt,
        omega_l: f64,
        omega_ffp: f64,
    },
    #[error("polarization q must be one of -1, 0, +1 (got {0})")]
    BadPolarization(i32),
    #[error("wavelength and intensity must satisfy lambda > 0, I >= 0")]
    BadBeam,
    #[error("shift table lacks the F = {0} ground manifold")]
    MissingManifold(HalfInt),
    #[error("angular momentum: {0}")]
    Angular(#[from] AngularError),
}

/// The far-detuned dressing beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarkBeam {
    /// Vacuum wavelength, m.
    pub wavelength: f64,
    /// Intensity, W/m^2.
    pub intensity: f64,
    /// Spherical polarization component: -1, 0 (linear), +1.
    pub polarization: i32,
}

impl StarkBeam {
    pub fn new(wavelength: f64, intensity: f64, polarization: i32) -> Result<Self, StarkError> {
        let ok = wavelength.is_finite() && wavelength > 0.0 && intensity.is_finite() && intensity >= 0.0;
        if !ok {
            return Err(StarkError::BadBeam);
        }
        if polarization.abs() > 1 {
            return Err(StarkError::BadPolarization(polarization));
        }
        Ok(StarkBeam {
            wavelength,
            intensity,
            polarization,
        })
    }

    /// Laser angular frequency `2 pi c / lambda`, rad/s.
    pub fn angular_frequency(&self) -> f64 {
        crate::consts::TWO_PI * C / self.wavelength
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ShiftOptions {
    /// Also include the `1/(omega_l + omega_FF')` term of second-order
    /// perturbation theory. Off by default.
    pub counter_rotating: bool,
}

/// Per-sublevel light shifts, rad/s.
#[derive(Debug, Clone)]
pub struct StarkShiftResult {
    /// `(F, m_F, delta)` for every ground sublevel, ordered (F asc, m_F asc).
    pub shifts: Vec<(HalfInt, HalfInt, f64)>,
    /// Beam detuning from the line center, rad/s.
    pub detuning: f64,
}

impl StarkShiftResult {
    pub fn shift(&self, f: HalfInt, m_f: HalfInt) -> Option<f64> {
        self.shifts
            .iter()
            .find(|&&(sf, sm, _)| sf == f && sm == m_f)
            .map(|&(_, _, d)| d)
    }
}

/// Memory bandwidth decomposition `|d20 - d10| + |d1| + |d2|`.
#[derive(Debug, Clone, Copy)]
pub struct BandwidthResult {
    /// `delta(2,0) - delta(1,0)`: relative shift of the two clock states, rad/s.
    pub clock_shift: f64,
    /// Intra-manifold spread `max_m |delta(1,m) - delta(1,0)|`, rad/s.
    pub spread_f1: f64,
    /// Intra-manifold spread for F = 2, rad/s.
    pub spread_f2: f64,
    /// Total `|clock| + spread_f1 + spread_f2`, rad/s.
    pub total: f64,
}

/// Per-sublevel photon scattering rates, rad/s.
#[derive(Debug, Clone)]
pub struct ScatteringResult {
    pub rates: Vec<(HalfInt, HalfInt, f64)>,
    pub max: f64,
}

/// Light shift of every ground sublevel under the given beam.
pub fn ground_state_shift(beam: &StarkBeam, line: &AtomicLine) -> Result<StarkShiftResult, StarkError> {
    ground_state_shift_with(beam, line, ShiftOptions::default())
}

pub fn ground_state_shift_with(
    beam: &StarkBeam,
    line: &AtomicLine,
    opts: ShiftOptions,
) -> Result<StarkShiftResult, StarkError> {
    let omega_l = beam.angular_frequency();
    check_resonance(omega_l, line)?;

    let q = HalfInt::from_int(beam.polarization);
    let prefactor = beam.intensity * line.reduced_dipole.powi(2) / (2.0 * HBAR * HBAR * EPS0 * C);

    let mut shifts = Vec::new();
    for state in line.enumerate_states(Manifold::Ground) {
        let m_prime = state.m_f + q;
        let mut acc = 0.0;
        for &(f_prime, _) in &line.excited_hyperfine {
            let strength = transition_strength(line, state.f, state.m_f, f_prime, m_prime, q)?;
            if strength == 0.0 {
                continue;
            }
            let omega = line.transition_frequency(state.f, f_prime).expect("validated levels");
            let mut term = strength / (omega_l - omega);
            if opts.counter_rotating {
                term -= strength / (omega_l + omega);
            }
            acc += term;
        }
        shifts.push((state.f, state.m_f, prefactor * acc));
    }
    Ok(StarkShiftResult {
        shifts,
        detuning: omega_l - line.line_center,
    })
}

/// Squared dimensionless matrix element
/// `(2F+1)(2F'+1)(2J+1) {J J' 1; F' F I}^2 (3j)^2`
/// for `|F, m> -> |F', m'>` under polarization `q` (`m' = m + q`).
fn transition_strength(
    line: &AtomicLine,
    f: HalfInt,
    m: HalfInt,
    f_prime: HalfInt,
    m_prime: HalfInt,
    q: HalfInt,
) -> Result<f64, StarkError> {
    if m_prime.twice().abs() > f_prime.twice() {
        return Ok(0.0);
    }
    let j = line.species.ground_j;
    let j_prime = line.excited_j;
    let i = line.species.nuclear_spin;
    let six = wigner_6j(j, j_prime, HalfInt::ONE, f_prime, f, i)?;
    let three = wigner_3j(f_prime, HalfInt::ONE, f, m_prime, -q, -m)?;
    let degeneracy = (f.multiplicity() * f_prime.multiplicity() * j.multiplicity()) as f64;
    Ok(degeneracy * six * six * three * three)
}

/// Signed dimensionless dipole element `<F m|er_q|F' m'> / <J||er||J'>`
/// (zero unless `m = m' + q`); used where amplitudes interfere.
fn signed_element(
    line: &AtomicLine,
    f: HalfInt,
    m: HalfInt,
    f_prime: HalfInt,
    m_prime: HalfInt,
) -> Result<f64, StarkError> {
    if m_prime.twice().abs() > f_prime.twice() || m.twice().abs() > f.twice() {
        return Ok(0.0);
    }
    let q = m - m_prime;
    if q.twice().abs() > 2 {
        return Ok(0.0);
    }
    let j = line.species.ground_j;
    let j_prime = line.excited_j;
    let i = line.species.nuclear_spin;
    let six = wigner_6j(j, j_prime, HalfInt::ONE, f_prime, f, i)?;
    let three = wigner_3j(f_prime, HalfInt::ONE, f, m_prime, q, -m)?;
    let degeneracy = ((f.multiplicity() * f_prime.multiplicity() * j.multiplicity()) as f64).sqrt();
    // phase (-1)^(F' + J + I + 1)
    let exponent_twice = f_prime.twice() + j.twice() + i.twice() + 2;
    debug_assert_eq!(exponent_twice % 2, 0);
    let sign = if (exponent_twice / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * degeneracy * six * three)
}

/// Margin around the hyperfine manifold, in natural linewidths, inside which
/// a beam counts as resonant (the perturbative shift is meaningless there).
pub const RESONANCE_MARGIN_LINEWIDTHS: f64 = 100.0;

fn check_resonance(omega_l: f64, line: &AtomicLine) -> Result<(), StarkError> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut nearest: Option<(HalfInt, HalfInt, f64)> = None;
    for &(f, _) in &line.ground_hyperfine {
        for &(f_prime, _) in &line.excited_hyperfine {
            let omega = line.transition_frequency(f, f_prime).expect("validated levels");
            lo = lo.min(omega);
            hi = hi.max(omega);
            if nearest.is_none_or(|(_, _, w)| (omega_l - omega).abs() < (omega_l - w).abs()) {
                nearest = Some((f, f_prime, omega));
            }
        }
    }
    let margin = RESONANCE_MARGIN_LINEWIDTHS * line.linewidth;
    if omega_l >= lo - margin && omega_l <= hi + margin {
        let (f, f_prime, omega_ffp) = nearest.expect("non-empty manifolds");
        return Err(StarkError::Resonant {
            f,
            f_prime,
            omega_l,
            omega_ffp,
        });
    }
    Ok(())
}

/// Memory bandwidth from a shift table containing the F = 1 and F = 2 ground
/// manifolds: `Delta_bw = |d20 - d10| + |d1| + |d2|` with `dF` the
/// intra-manifold spread `max_m |delta(F, m) - delta(F, 0)|`.
pub fn memory_bandwidth(shift: &StarkShiftResult) -> Result<BandwidthResult, StarkError> {
    let f1 = HalfInt::from_int(1);
    let f2 = HalfInt::from_int(2);
    let d10 = shift
        .shift(f1, HalfInt::ZERO)
        .ok_or(StarkError::MissingManifold(f1))?;
    let d20 = shift
        .shift(f2, HalfInt::ZERO)
        .ok_or(StarkError::MissingManifold(f2))?;
    let spread = |f: HalfInt, center: f64| {
        shift
            .shifts
            .iter()
            .filter(|&&(sf, _, _)| sf == f)
            .map(|&(_, _, d)| (d - center).abs())
            .fold(0.0, f64::max)
    };
    let spread_f1 = spread(f1, d10);
    let spread_f2 = spread(f2, d20);
    let clock_shift = d20 - d10;
    Ok(BandwidthResult {
        clock_shift,
        spread_f1,
        spread_f2,
        total: clock_shift.abs() + spread_f1 + spread_f2,
    })
}

/// Photon scattering rate of every ground sublevel under the given beam.
pub fn scattering_rate(beam: &StarkBeam, line: &AtomicLine) -> Result<ScatteringResult, StarkError> {
    let omega_l = beam.angular_frequency();
    check_resonance(omega_l, line)?;

    let q = HalfInt::from_int(beam.polarization);
    let d2 = line.reduced_dipole.powi(2);
    let prefactor = beam.intensity * omega_l.powi(3) * d2 * d2
        / (6.0 * std::f64::consts::PI * EPS0 * EPS0 * HBAR.powi(3) * C.powi(4));

    let ground = line.enumerate_states(Manifold::Ground);
    let mut rates = Vec::new();
    let mut max = 0.0f64;
    for g in &ground {
        let m_prime = g.m_f + q;
        let mut sum_final = 0.0;
        for f in &ground {
            // scattered polarization q_sc = m_prime - m_f must be spherical
            if (m_prime - f.m_f).twice().abs() > 2 {
                continue;
            }
            let mut amplitude = 0.0;
            for &(f_prime, _) in &line.excited_hyperfine {
                let up = signed_element(line, g.f, g.m_f, f_prime, m_prime)?;
                if up == 0.0 {
                    continue;
                }
                let down = signed_element(line, f.f, f.m_f, f_prime, m_prime)?;
                if down == 0.0 {
                    continue;
                }
                let omega = line.transition_frequency(g.f, f_prime).expect("validated levels");
                amplitude += down * up / (omega_l - omega);
            }
            sum_final += amplitude * amplitude;
        }
        let rate = prefactor * sum_final;
        max = max.max(rate);
        rates.push((g.f, g.m_f, rate));
    }
    Ok(ScatteringResult { rates, max })
}

/// Evaluates `memory_bandwidth` over a (wavelength x intensity) grid.
///
/// Cells where the beam sits within one natural linewidth of a hyperfine
/// transition are masked rather than failed. The default extracted level is
/// `2 pi x 1 GHz`.
pub fn bandwidth_map(
    lambda: &AxisSpec,
    intensity: &AxisSpec,
    polarization: i32,
    line: &AtomicLine,
    levels: &[f64],
    opts: &SweepOptions,
) -> Result<ContourResult, SweepError> {
    let grid = ParamGrid::new("lambda_m", "intensity_W_m2", lambda.values()?, intensity.values()?)?;
    let mut result = sweep::run_sweep(
        grid,
        |lam, inten| stark_cell(lam, inten, polarization, line, StarkQuantity::Bandwidth),
        opts,
    )?;
    result.extract_contours(levels);
    Ok(result)
}

/// Evaluates the maximum scattering rate over a (wavelength x intensity)
/// grid. The default extracted level is `2 pi x 5 MHz`.
pub fn scattering_map(
    lambda: &AxisSpec,
    intensity: &AxisSpec,
    polarization: i32,
    line: &AtomicLine,
    levels: &[f64],
    opts: &SweepOptions,
) -> Result<ContourResult, SweepError> {
    let grid = ParamGrid::new("lambda_m", "intensity_W_m2", lambda.values()?, intensity.values()?)?;
    let mut result = sweep::run_sweep(
        grid,
        |lam, inten| stark_cell(lam, inten, polarization, line, StarkQuantity::Scattering),
        opts,
    )?;
    result.extract_contours(levels);
    Ok(result)
}

#[derive(Clone, Copy)]
enum StarkQuantity {
    Bandwidth,
    Scattering,
}

fn stark_cell(
    lambda: f64,
    intensity: f64,
    polarization: i32,
    line: &AtomicLine,
    quantity: StarkQuantity,
) -> CellOutcome {
    let beam = match StarkBeam::new(lambda, intensity, polarization) {
        Ok(b) => b,
        Err(e) => return CellOutcome::Failed(e.to_string()),
    };
    let value = match quantity {
        StarkQuantity::Bandwidth => {
            ground_state_shift(&beam, line).and_then(|s| memory_bandwidth(&s).map(|b| b.total))
        }
        StarkQuantity::Scattering => scattering_rate(&beam, line).map(|s| s.max),
    };
    match value {
        Ok(v) => CellOutcome::Done(v),
        Err(StarkError::Resonant { .. }) => CellOutcome::Masked,
        Err(e) => CellOutcome::Failed(e.to_string()),
    }
}

/// Default iso-level for bandwidth maps: 2 pi x 1 GHz.
pub const BANDWIDTH_LEVEL: f64 = crate::consts::TWO_PI * 1e9;
/// Default iso-level for scattering maps: 2 pi x 5 MHz.
pub const SCATTERING_LEVEL: f64 = crate::consts::TWO_PI * 5e6;
