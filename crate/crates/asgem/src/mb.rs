//! Three-level Maxwell-Bloch dynamics of gradient-echo storage.
//!
//! The weak-probe equations
//!
//! ```text
//! d/dt rho31 = -(Gamma/2 + i Dp) rho31 + (i/2) Oc rho21 + (i/2) Op
//! d/dt rho21 = i (Dc - Dp + i gamma) rho21 + (i/2) Oc* rho31
//! d/dz Op    = i eta rho31,   eta = Gamma xi / (2 L)
//! ```
//!
//! are integrated in the retarded frame (the 1/c time derivative is absorbed
//! into the co-moving time coordinate; the medium transit time is many orders
//! below the atomic lifetime). Everything is nondimensionalized: time in
//! units of the excited-state lifetime tau = 1/Gamma, space in units of the
//! medium length L, Rabi frequencies and detunings in units of Gamma.
//!
//! The control field carries the gradient in its Rabi amplitude,
//! `Oc(z) = zeta Gamma z / L`, and the reversal flips its sign at `t_rev`.
//! The sign flip exchanges the two Autler-Townes dressed states, whose
//! energies `+-Oc(z)/2` form the spatial frequency ladder, so the dressed
//! phases run backwards after the flip and the stored pulse re-emerges as an
//! echo near `2 t_rev - t0`.
//!
//! The numerical scheme is classic method of lines along characteristics:
//! the two coherence ODEs are stepped with explicit RK4 at every z node, and
//! at each stage the probe field is reconstructed by trapezoidal integration
//! of `d/dz Op = i (xi/2) rho31` from the boundary pulse. A step-size
//! controller halves dt until `dt * max rotation rate <= 0.5`.

use num_complex::Complex64 as C64;

use crate::consts::TWO_PI;
use crate::sweep::{self, AxisSpec, CellOutcome, ContourResult, ParamGrid, SweepError, SweepOptions};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("integration diverged at t = {t:.4} tau, z = {z:.4} L")]
    Diverged { t: f64, z: f64 },
    #[error("step controller needs more than 2^26 steps (rotation rate {rate:.3e} Gamma)")]
    StepLimit { rate: f64 },
    #[error("echo truncated: |output({t_end:.3} tau)|^2 is {tail_fraction:.2e} of the echo peak (> 1e-3); extend the time window")]
    Truncated { t_end: f64, tail_fraction: f64 },
}

/// Full parameter set of one storage/retrieval run.
///
/// Frequencies are SI angular (rad/s); only their ratios to `gamma` enter
/// the dimensionless integration. Times are in units of tau = 1/Gamma.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Optical depth xi (dimensionless); coupling eta L = Gamma xi / 2.
    pub xi: f64,
    /// Gradient strength zeta (dimensionless).
    pub zeta: f64,
    /// Excited-state decay rate Gamma, rad/s. Sets the time unit.
    pub gamma: f64,
    /// Ground-state decoherence rate, rad/s.
    pub gamma_dec: f64,
    /// Probe one-photon detuning, rad/s.
    pub delta_p: f64,
    /// Control one-photon detuning, rad/s.
    pub delta_c: f64,
    /// Probe pulse peak Rabi frequency, rad/s.
    pub probe_amp: f64,
    /// Constant control Rabi frequency, rad/s. Used only for non-gradient
    /// runs (`zeta = 0`); gradient runs take `Oc(z) = zeta Gamma z / L`.
    pub control_rabi: f64,
    /// Pulse center, tau.
    pub t0: f64,
    /// Pulse width kappa, tau.
    pub kappa: f64,
    /// Gradient reversal time, tau.
    pub t_rev: f64,
    /// End of the simulation window, tau.
    pub t_max: f64,
    /// Spatial grid points.
    pub nz: usize,
    /// Requested time samples (the controller may step finer internally).
    pub nt: usize,
    /// Flip the control sign at `t_rev`. Disable for dephasing-only
    /// comparison runs; `t_rev` still marks the retrieval window.
    pub reversal: bool,
    /// Keep the full space-time grids (memory: nt x nz per field).
    pub store_grids: bool,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            xi: 2500.0,
            zeta: 1250.0,
            gamma: TWO_PI * 5e6,
            gamma_dec: 0.0,
            delta_p: TWO_PI * 200e6,
            delta_c: TWO_PI * 50e6,
            probe_amp: TWO_PI * 5e3,
            control_rabi: TWO_PI * 500e6,
            t0: 0.048,
            kappa: 0.005,
            t_rev: 0.16,
            t_max: 0.5,
            nz: 512,
            nt: 4096,
            reversal: true,
            store_grids: false,
        }
    }
}

impl SimulationConfig {
    /// Checks the invariants; returns human-readable warnings (currently only
    /// the weak-probe condition).
    pub fn validate(&self) -> Result<Vec<String>, SimError> {
        let bad = |msg: &str| Err(SimError::Config(msg.to_owned()));
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.xi) {
            return bad("optical depth xi must be > 0");
        }
        if !positive(self.gamma) {
            return bad("Gamma must be > 0");
        }
        if self.gamma_dec.is_nan() || self.gamma_dec < 0.0 {
            return bad("decoherence rate must be >= 0");
        }
        if !positive(self.kappa) {
            return bad("pulse width kappa must be > 0");
        }
        if self.nz < 2 || self.nt < 2 {
            return bad("need nz >= 2 and nt >= 2");
        }
        if !(0.0 < self.t0 && self.t0 < self.t_rev && self.t_rev < self.t_max) {
            return bad("times must satisfy 0 < t0 < t_rev < t_max");
        }
        let mut warnings = Vec::new();
        if self.probe_amp.abs() > 0.1 * self.gamma {
            warnings.push(format!(
                "weak-probe condition violated: |probe_amp| = {:.3e} rad/s is not << Gamma = {:.3e} rad/s",
                self.probe_amp.abs(),
                self.gamma
            ));
        }
        Ok(warnings)
    }

    fn stiffness_rate(&self) -> f64 {
        let dp = (self.delta_p / self.gamma).abs();
        let d2 = ((self.delta_c - self.delta_p) / self.gamma).abs();
        let oc_max = if self.zeta != 0.0 {
            self.zeta.abs()
        } else {
            (self.control_rabi / self.gamma).abs()
        };
        0.5f64.max(dp).max(oc_max).max(d2)
    }
}

/// Gradient control profile in Gamma units: `zeta * z` for `t < t_rev`,
/// negated afterwards. `z` is the position as a fraction of L.
pub fn control_profile(zeta: f64, t: f64, z: f64, t_rev: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&z));
    if t < t_rev {
        zeta * z
    } else {
        -zeta * z
    }
}

/// A stored space-time grid, sample-major (`data[it * n_z + iz]`).
#[derive(Debug, Clone)]
pub struct GridData {
    pub n_t: usize,
    pub n_z: usize,
    pub data: Vec<C64>,
}

/// Time series (and optional grids) produced by [`simulate`].
#[derive(Debug, Clone)]
pub struct FieldRecord {
    /// Recorded sample times, tau.
    pub t: Vec<f64>,
    /// Probe at the entrance face, Gamma units.
    pub input: Vec<C64>,
    /// Probe at the exit face, Gamma units.
    pub output: Vec<C64>,
    /// Largest |rho31| over the whole run.
    pub max_abs_rho31: f64,
    /// Largest |rho21| over the whole run.
    pub max_abs_rho21: f64,
    /// Internal integrator step, tau.
    pub dt_internal: f64,
    /// Spatial step, L units.
    pub dz: f64,
    pub probe_grid: Option<GridData>,
    pub rho31_grid: Option<GridData>,
    pub rho21_grid: Option<GridData>,
    /// Warnings from config validation.
    pub warnings: Vec<String>,
}

impl FieldRecord {
    /// Trapezoidal `integral |f|^2 dt` over the samples, from `t_from`.
    fn energy(&self, trace: &[C64], t_from: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.t.len().saturating_sub(1) {
            let (ta, tb) = (self.t[i], self.t[i + 1]);
            if tb <= t_from {
                continue;
            }
            let (fa, fb) = (trace[i].norm_sqr(), trace[i + 1].norm_sqr());
            if ta >= t_from {
                acc += 0.5 * (fa + fb) * (tb - ta);
            } else {
                // clip the straddling interval at t_from
                let s = (t_from - ta) / (tb - ta);
                let f_cut = fa + (fb - fa) * s;
                acc += 0.5 * (f_cut + fb) * (tb - t_from);
            }
        }
        acc
    }

    pub fn input_energy(&self) -> f64 {
        self.energy(&self.input, f64::NEG_INFINITY)
    }

    pub fn output_energy(&self) -> f64 {
        self.energy(&self.output, f64::NEG_INFINITY)
    }

    pub fn output_energy_after(&self, t_from: f64) -> f64 {
        self.energy(&self.output, t_from)
    }

    /// Trace CSV: `t_tau,re_in,im_in,abs2_in,re_out,im_out,abs2_out`.
    pub fn to_trace_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("t_tau,re_in,im_in,abs2_in,re_out,im_out,abs2_out\n");
        for i in 0..self.t.len() {
            let (a, b) = (self.input[i], self.output[i]);
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e},{:e},{:e},{:e}",
                self.t[i],
                a.re,
                a.im,
                a.norm_sqr(),
                b.re,
                b.im,
                b.norm_sqr()
            );
        }
        out
    }

    /// Binary dump of the probe grid: 64-byte header (magic `ASGEMGRD`,
    /// n_t u32, n_z u32, dt f64, dz f64, zero padding), then row-major
    /// complex64 (f32 re, f32 im) samples. `None` when grids were not stored.
    pub fn grid_dump_bytes(&self) -> Option<Vec<u8>> {
        let grid = self.probe_grid.as_ref()?;
        let dt = if self.t.len() > 1 { self.t[1] - self.t[0] } else { 0.0 };
        let mut bytes = Vec::with_capacity(64 + grid.data.len() * 8);
        bytes.extend_from_slice(b"ASGEMGRD");
        bytes.extend_from_slice(&(grid.n_t as u32).to_le_bytes());
        bytes.extend_from_slice(&(grid.n_z as u32).to_le_bytes());
        bytes.extend_from_slice(&dt.to_le_bytes());
        bytes.extend_from_slice(&self.dz.to_le_bytes());
        bytes.resize(64, 0);
        for v in &grid.data {
            bytes.extend_from_slice(&(v.re as f32).to_le_bytes());
            bytes.extend_from_slice(&(v.im as f32).to_le_bytes());
        }
        Some(bytes)
    }
}

/// Echo figures of merit extracted from a [`FieldRecord`].
#[derive(Debug, Clone, PartialEq)]
pub struct EchoMetrics {
    /// Retrieved-over-input energy ratio `R`.
    pub efficiency: f64,
    /// Energy centroid of the output after the reversal, tau; absent for an
    /// empty echo window.
    pub echo_center: Option<f64>,
    /// FWHM of |output|^2 around the echo peak, tau.
    pub echo_fwhm: Option<f64>,
    /// FWHM of |input|^2, tau.
    pub input_fwhm: f64,
}

/// Integrates one storage/retrieval run.
pub fn simulate(cfg: &SimulationConfig) -> Result<FieldRecord, SimError> {
    let warnings = cfg.validate()?;

    let nz = cfg.nz;
    let dz = 1.0 / (nz - 1) as f64;
    let dp = cfg.delta_p / cfg.gamma;
    let d2_const = (cfg.delta_c - cfg.delta_p) / cfg.gamma;
    let gd = cfg.gamma_dec / cfg.gamma;
    let oc0 = cfg.control_rabi / cfg.gamma; // non-gradient runs only
    let amp = cfg.probe_amp / cfg.gamma;
    let half_xi = 0.5 * cfg.xi;

    // a-priori step control on the fastest rotation rate
    let rate = cfg.stiffness_rate();
    let mut stride = 1usize;
    let mut n_steps = cfg.nt;
    let mut dt = cfg.t_max / n_steps as f64;
    while dt * rate > 0.5 {
        dt *= 0.5;
        n_steps *= 2;
        stride *= 2;
        if n_steps > (1 << 26) {
            return Err(SimError::StepLimit { rate });
        }
    }

    let pulse = |t: f64| {
        let arg = (t - cfg.t0) / cfg.kappa;
        C64::new(amp * (-arg * arg).exp(), 0.0)
    };

    let zero = vec![C64::new(0.0, 0.0); nz];
    let mut r31 = zero.clone();
    let mut r21 = zero.clone();
    let mut k1 = (zero.clone(), zero.clone());
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp31 = zero.clone();
    let mut tmp21 = zero.clone();
    let mut omega = zero.clone();

    // reconstruct Op(t, z) from the boundary pulse and rho31, then evaluate
    // the coherence derivatives
    let deriv = |t: f64,
                 r31: &[C64],
                 r21: &[C64],
                 out31: &mut [C64],
                 out21: &mut [C64],
                 omega: &mut [C64]| {
        omega[0] = pulse(t);
        for j in 1..nz {
            let avg = 0.5 * (r31[j - 1] + r31[j]);
            omega[j] = omega[j - 1] + C64::new(0.0, half_xi * dz) * avg;
        }
        let flip = if cfg.reversal && t >= cfg.t_rev { -1.0 } else { 1.0 };
        for j in 0..nz {
            let z = j as f64 * dz;
            let oc = if cfg.zeta != 0.0 {
                flip * cfg.zeta * z
            } else {
                flip * oc0
            };
            out31[j] = C64::new(-0.5, -dp) * r31[j]
                + C64::new(0.0, 0.5) * (oc * r21[j] + omega[j]);
            out21[j] = C64::new(-gd, d2_const) * r21[j] + C64::new(0.0, 0.5 * oc) * r31[j];
        }
    };

    let n_samples = n_steps / stride + 1;
    let mut record = FieldRecord {
        t: Vec::with_capacity(n_samples),
        input: Vec::with_capacity(n_samples),
        output: Vec::with_capacity(n_samples),
        max_abs_rho31: 0.0,
        max_abs_rho21: 0.0,
        dt_internal: dt,
        dz,
        probe_grid: cfg.store_grids.then(|| GridData {
            n_t: n_samples,
            n_z: nz,
            data: Vec::with_capacity(n_samples * nz),
        }),
        rho31_grid: cfg.store_grids.then(|| GridData {
            n_t: n_samples,
            n_z: nz,
            data: Vec::with_capacity(n_samples * nz),
        }),
        rho21_grid: cfg.store_grids.then(|| GridData {
            n_t: n_samples,
            n_z: nz,
            data: Vec::with_capacity(n_samples * nz),
        }),
        warnings,
    };

    let sample = |t: f64,
                  r31: &[C64],
                  r21: &[C64],
                  omega: &mut [C64],
                  record: &mut FieldRecord| {
        omega[0] = pulse(t);
        for j in 1..nz {
            let avg = 0.5 * (r31[j - 1] + r31[j]);
            omega[j] = omega[j - 1] + C64::new(0.0, half_xi * dz) * avg;
        }
        record.t.push(t);
        record.input.push(omega[0]);
        record.output.push(omega[nz - 1]);
        if let Some(g) = record.probe_grid.as_mut() {
            g.data.extend_from_slice(omega);
        }
        if let Some(g) = record.rho31_grid.as_mut() {
            g.data.extend_from_slice(r31);
        }
        if let Some(g) = record.rho21_grid.as_mut() {
            g.data.extend_from_slice(r21);
        }
    };

    sample(0.0, &r31, &r21, &mut omega, &mut record);

    for step in 0..n_steps {
        let t = step as f64 * dt;

        deriv(t, &r31, &r21, &mut k1.0, &mut k1.1, &mut omega);
        axpy(&mut tmp31, &r31, &k1.0, 0.5 * dt);
        axpy(&mut tmp21, &r21, &k1.1, 0.5 * dt);
        deriv(t + 0.5 * dt, &tmp31, &tmp21, &mut k2.0, &mut k2.1, &mut omega);
        axpy(&mut tmp31, &r31, &k2.0, 0.5 * dt);
        axpy(&mut tmp21, &r21, &k2.1, 0.5 * dt);
        deriv(t + 0.5 * dt, &tmp31, &tmp21, &mut k3.0, &mut k3.1, &mut omega);
        axpy(&mut tmp31, &r31, &k3.0, dt);
        axpy(&mut tmp21, &r21, &k3.1, dt);
        deriv(t + dt, &tmp31, &tmp21, &mut k4.0, &mut k4.1, &mut omega);

        let w = dt / 6.0;
        let mut max31 = 0.0f64;
        let mut max21 = 0.0f64;
        let mut bad_z = None;
        for j in 0..nz {
            r31[j] += w * (k1.0[j] + 2.0 * (k2.0[j] + k3.0[j]) + k4.0[j]);
            r21[j] += w * (k1.1[j] + 2.0 * (k2.1[j] + k3.1[j]) + k4.1[j]);
            let n31 = r31[j].norm_sqr();
            let n21 = r21[j].norm_sqr();
            if !n31.is_finite() || !n21.is_finite() {
                bad_z.get_or_insert(j as f64 * dz);
            }
            max31 = max31.max(n31);
            max21 = max21.max(n21);
        }
        if let Some(z) = bad_z {
            return Err(SimError::Diverged { t: t + dt, z });
        }
        record.max_abs_rho31 = record.max_abs_rho31.max(max31.sqrt());
        record.max_abs_rho21 = record.max_abs_rho21.max(max21.sqrt());

        if (step + 1) % stride == 0 {
            sample((step + 1) as f64 * dt, &r31, &r21, &mut omega, &mut record);
        }
    }

    Ok(record)
}

fn axpy(dst: &mut [C64], base: &[C64], k: &[C64], a: f64) {
    for j in 0..dst.len() {
        dst[j] = base[j] + a * k[j];
    }
}

/// Echo efficiency, timing, and widths. Errors if the output has not decayed
/// below 1e-3 of the echo peak (in power) by the end of the window.
pub fn echo_metrics(record: &FieldRecord, t_rev: f64) -> Result<EchoMetrics, SimError> {
    let input_energy = record.input_energy();
    let out_after = record.output_energy_after(t_rev);
    let efficiency = if input_energy > 0.0 {
        out_after / input_energy
    } else {
        0.0
    };

    // echo window: samples after the reversal
    let start = record.t.partition_point(|&t| t <= t_rev);
    let window_t = &record.t[start..];
    let window: Vec<f64> = record.output[start..].iter().map(|v| v.norm_sqr()).collect();

    let peak = window.iter().cloned().fold(0.0f64, f64::max);
    if peak > 0.0 {
        let tail = window.last().copied().unwrap_or(0.0);
        if tail > 1e-3 * peak {
            return Err(SimError::Truncated {
                t_end: *record.t.last().expect("non-empty record"),
                tail_fraction: tail / peak,
            });
        }
    }

    let echo_center = if peak > 0.0 && out_after > 0.0 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..window.len().saturating_sub(1) {
            let dt = window_t[i + 1] - window_t[i];
            num += 0.5 * (window_t[i] * window[i] + window_t[i + 1] * window[i + 1]) * dt;
            den += 0.5 * (window[i] + window[i + 1]) * dt;
        }
        (den > 0.0).then(|| num / den)
    } else {
        None
    };

    let echo_fwhm = fwhm(window_t, &window);
    let input_abs2: Vec<f64> = record.input.iter().map(|v| v.norm_sqr()).collect();
    let input_fwhm = fwhm(&record.t, &input_abs2).unwrap_or(0.0);

    Ok(EchoMetrics {
        efficiency,
        echo_center,
        echo_fwhm,
        input_fwhm,
    })
}

/// Full width at half maximum of a sampled envelope, linearly interpolated;
/// `None` when the half level never crosses inside the window.
fn fwhm(t: &[f64], y: &[f64]) -> Option<f64> {
    if y.len() < 3 {
        return None;
    }
    let (imax, &peak) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).expect("finite envelope"))?;
    if peak <= 0.0 {
        return None;
    }
    let half = 0.5 * peak;
    let mut left = None;
    for i in (1..=imax).rev() {
        if y[i - 1] <= half && y[i] > half {
            let s = (half - y[i - 1]) / (y[i] - y[i - 1]);
            left = Some(t[i - 1] + s * (t[i] - t[i - 1]));
            break;
        }
    }
    let mut right = None;
    for i in imax..y.len() - 1 {
        if y[i] > half && y[i + 1] <= half {
            let s = (y[i] - half) / (y[i] - y[i + 1]);
            right = Some(t[i] + s * (t[i + 1] - t[i]));
            break;
        }
    }
    Some(right? - left?)
}

/// Sweeps `(xi, zeta)` and records the efficiency R per cell. Failed cells
/// carry their error message and do not abort the sweep.
pub fn efficiency_map(
    xi: &AxisSpec,
    zeta: &AxisSpec,
    base: &SimulationConfig,
    levels: &[f64],
    opts: &SweepOptions,
) -> Result<ContourResult, SweepError> {
    let grid = ParamGrid::new("xi", "zeta", xi.values()?, zeta.values()?)?;
    let mut result = sweep::run_sweep(
        grid,
        |x, z| {
            let mut cfg = base.clone();
            cfg.xi = x;
            cfg.zeta = z;
            cfg.store_grids = false;
            match simulate(&cfg).and_then(|r| echo_metrics(&r, cfg.t_rev)) {
                Ok(m) => CellOutcome::Done(m.efficiency),
                Err(e) => CellOutcome::Failed(e.to_string()),
            }
        },
        opts,
    )?;
    result.extract_contours(levels);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse(xi: f64, zeta: f64) -> SimulationConfig {
        SimulationConfig {
            xi,
            zeta,
            nz: 96,
            nt: 2048,
            ..SimulationConfig::default()
        }
    }

    #[test]
    fn zero_probe_gives_zero_fields() {
        let cfg = SimulationConfig {
            probe_amp: 0.0,
            nz: 32,
            nt: 256,
            zeta: 100.0,
            xi: 100.0,
            ..SimulationConfig::default()
        };
        let rec = simulate(&cfg).unwrap();
        assert!(rec.output.iter().all(|v| v.norm_sqr() == 0.0));
        assert_eq!(rec.max_abs_rho21, 0.0);
        let m = echo_metrics(&rec, cfg.t_rev).unwrap();
        assert_eq!(m.efficiency, 0.0);
        assert_eq!(m.echo_center, None);
    }

    #[test]
    fn control_profile_matches_contract() {
        assert_eq!(control_profile(1250.0, 0.1, 1.0, 0.16), 1250.0);
        assert_eq!(control_profile(1250.0, 0.2, 1.0, 0.16), -1250.0);
        assert_eq!(control_profile(773.0, 0.3, 0.0, 0.16), -0.0);
        assert_eq!(control_profile(773.0, 0.01, 0.0, 0.16), 0.0);
        assert_eq!(control_profile(1000.0, 0.0, 0.5, 0.16), 500.0);
    }

    #[test]
    fn probe_scaling_is_linear() {
        let base = coarse(500.0, 400.0);
        let rec1 = simulate(&base).unwrap();
        let mut scaled = base.clone();
        scaled.probe_amp *= 2.0;
        let rec2 = simulate(&scaled).unwrap();
        for (a, b) in rec1.output.iter().zip(&rec2.output) {
            assert_eq!(2.0 * a, *b); // doubling is exact in IEEE
        }
        let m1 = echo_metrics(&rec1, base.t_rev).unwrap();
        let m2 = echo_metrics(&rec2, base.t_rev).unwrap();
        assert!((m1.efficiency - m2.efficiency).abs() < 1e-9 * m1.efficiency.max(1e-30));
    }

    #[test]
    fn passivity_and_coherence_bounds() {
        let cfg = coarse(800.0, 600.0);
        let rec = simulate(&cfg).unwrap();
        let e_in = rec.input_energy();
        let e_out = rec.output_energy();
        assert!(e_out <= e_in * 1.001, "output {e_out} vs input {e_in}");
        assert!(rec.max_abs_rho31 <= 1.0 && rec.max_abs_rho21 <= 1.0);
    }

    #[test]
    fn causality_of_the_output_trace() {
        let cfg = coarse(800.0, 600.0);
        let rec = simulate(&cfg).unwrap();
        let peak = rec
            .output
            .iter()
            .map(|v| v.norm_sqr())
            .fold(0.0f64, f64::max)
            .sqrt();
        for (i, &t) in rec.t.iter().enumerate() {
            let out = rec.output[i].norm_sqr().sqrt();
            if t < cfg.t0 - 6.0 * cfg.kappa {
                assert!(out < 1e-12 * peak, "t={t}: {out} vs peak {peak}");
            }
            if t < cfg.t0 - 4.0 * cfg.kappa {
                // no precursor beyond the input's own leading tail
                let inp = rec.input[i].norm_sqr().sqrt();
                assert!(out <= 2.0 * inp + 1e-12 * peak, "t={t}");
            }
        }
    }

    #[test]
    fn truncated_window_is_an_error() {
        let cfg = SimulationConfig {
            t_max: 0.18, // reversal at 0.16, echo would land at ~0.27
            ..coarse(2500.0, 1250.0)
        };
        match echo_metrics(&simulate(&cfg).unwrap(), cfg.t_rev) {
            Err(SimError::Truncated { .. }) => {}
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn efficiency_map_cell_matches_direct_run() {
        use crate::sweep::{AxisSpec, SweepOptions};
        let base = coarse(800.0, 600.0);
        let map = efficiency_map(
            &AxisSpec::linear(800.0, 800.0, 1),
            &AxisSpec::linear(600.0, 600.0, 1),
            &base,
            &[],
            &SweepOptions::default(),
        )
        .unwrap();
        let direct = echo_metrics(&simulate(&base).unwrap(), base.t_rev)
            .unwrap()
            .efficiency;
        let cell = map.cells[0].value().unwrap();
        assert!((cell - direct).abs() <= 1e-6 * direct, "{cell} vs {direct}");
    }

    #[test]
    fn no_reversal_regression_oracle() {
        // reference run on a frozen coarse grid: without the sign flip the
        // retrieved-window energy fraction stays small
        let cfg = SimulationConfig {
            nz: 128,
            nt: 2048,
            reversal: false,
            ..SimulationConfig::default()
        };
        let rec = simulate(&cfg).unwrap();
        let frac = rec.output_energy_after(cfg.t_rev) / rec.input_energy();
        let frozen = 1.088365881855e-2;
        assert!(
            ((frac - frozen) / frozen).abs() < 1e-6,
            "retrieved fraction drifted: {frac:.12e} vs {frozen:.12e}"
        );

        // the reversal is what produces the echo
        let cfg = SimulationConfig {
            nz: 128,
            nt: 2048,
            ..SimulationConfig::default()
        };
        let rec = simulate(&cfg).unwrap();
        let with = rec.output_energy_after(cfg.t_rev) / rec.input_energy();
        assert!(with > 0.70, "echo missing: {with}");
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = SimulationConfig {
            t_rev: 0.01, // before t0
            ..SimulationConfig::default()
        };
        assert!(matches!(simulate(&cfg), Err(SimError::Config(_))));
        let cfg = SimulationConfig {
            xi: -1.0,
            ..SimulationConfig::default()
        };
        assert!(matches!(simulate(&cfg), Err(SimError::Config(_))));
    }

    #[test]
    fn weak_probe_warning() {
        let cfg = SimulationConfig {
            probe_amp: TWO_PI * 5e6,
            ..SimulationConfig::default()
        };
        let warnings = cfg.validate().unwrap();
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn grid_dump_layout() {
        let cfg = SimulationConfig {
            store_grids: true,
            ..coarse(200.0, 100.0)
        };
        let rec = simulate(&cfg).unwrap();
        let bytes = rec.grid_dump_bytes().unwrap();
        assert_eq!(&bytes[..8], b"ASGEMGRD");
        let n_t = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let n_z = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        assert_eq!(n_z, cfg.nz);
        assert_eq!(n_t, rec.t.len());
        assert_eq!(bytes.len(), 64 + n_t * n_z * 8);
    }
}
