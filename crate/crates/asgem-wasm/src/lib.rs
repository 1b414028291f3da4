//! Browser bindings for the toolkit: three interactive operations behind
//! `wasm-bindgen`, each returning a JSON string for the demo page to plot.
//!
//! Build with `wasm-pack build crates/asgem-wasm --target web`; the static
//! page in `www/` loads the generated module.

use asgem::atom::rb87_d1;
use asgem::consts::TWO_PI;
use asgem::mb::{echo_metrics, simulate, SimulationConfig};
use asgem::stark::{ground_state_shift, memory_bandwidth, scattering_rate, StarkBeam};
use wasm_bindgen::prelude::wasm_bindgen;

fn json_error(msg: &str) -> String {
    format!("{{\"error\":\"{}\"}}", msg.replace('\\', "\\\\").replace('"', "\\\""))
}

fn json_numbers(values: impl Iterator<Item = f64>) -> String {
    let mut out = String::from("[");
    for (i, v) in values.enumerate() {
        if i > 0 {
            out.push(',');
        }
        if v.is_finite() {
            out.push_str(&format!("{v:.6e}"));
        } else {
            out.push_str("null");
        }
    }
    out.push(']');
    out
}

/// Per-sublevel light shifts, bandwidth, and scattering for the built-in
/// 87Rb D1 line. Frequencies in the output are linear (Hz family).
#[wasm_bindgen]
pub fn stark_report(wavelength_nm: f64, intensity_w_m2: f64, polarization: i32) -> String {
    let line = rb87_d1();
    let beam = match StarkBeam::new(wavelength_nm * 1e-9, intensity_w_m2, polarization) {
        Ok(b) => b,
        Err(e) => return json_error(&e.to_string()),
    };
    let shifts = match ground_state_shift(&beam, &line) {
        Ok(s) => s,
        Err(e) => return json_error(&e.to_string()),
    };
    let bw = match memory_bandwidth(&shifts) {
        Ok(b) => b,
        Err(e) => return json_error(&e.to_string()),
    };
    let sc = match scattering_rate(&beam, &line) {
        Ok(s) => s,
        Err(e) => return json_error(&e.to_string()),
    };

    let mut levels = String::from("[");
    for (i, &(f, m, shift)) in shifts.shifts.iter().enumerate() {
        if i > 0 {
            levels.push(',');
        }
        levels.push_str(&format!(
            "{{\"f\":{},\"m\":{},\"shift_ghz\":{:.6e}}}",
            f.as_f64(),
            m.as_f64(),
            shift / TWO_PI / 1e9
        ));
    }
    levels.push(']');

    format!(
        "{{\"detuning_thz\":{:.6e},\"levels\":{},\"clock_mhz\":{:.6e},\"spread_f1_mhz\":{:.6e},\"spread_f2_mhz\":{:.6e},\"bandwidth_mhz\":{:.6e},\"scattering_max_khz\":{:.6e}}}",
        shifts.detuning / TWO_PI / 1e12,
        levels,
        bw.clock_shift / TWO_PI / 1e6,
        bw.spread_f1 / TWO_PI / 1e6,
        bw.spread_f2 / TWO_PI / 1e6,
        bw.total / TWO_PI / 1e6,
        sc.max / TWO_PI / 1e3,
    )
}

/// One storage/retrieval run at the given optical depth and gradient
/// strength; returns normalized |input|^2 and |output|^2 traces plus the
/// echo metrics. Traces are downsampled to at most 1200 points.
#[wasm_bindgen]
pub fn echo_trace(xi: f64, zeta: f64, nz: u32, nt: u32) -> String {
    let cfg = SimulationConfig {
        xi,
        zeta,
        nz: (nz as usize).max(2),
        nt: (nt as usize).max(2),
        ..SimulationConfig::default()
    };
    let rec = match simulate(&cfg) {
        Ok(r) => r,
        Err(e) => return json_error(&e.to_string()),
    };
    let peak_in = rec
        .input
        .iter()
        .map(|v| v.norm_sqr())
        .fold(0.0f64, f64::max)
        .max(1e-300);

    let stride = (rec.t.len() / 1200).max(1);
    let t = json_numbers(rec.t.iter().step_by(stride).copied());
    let input = json_numbers(rec.input.iter().step_by(stride).map(|v| v.norm_sqr() / peak_in));
    let output = json_numbers(rec.output.iter().step_by(stride).map(|v| v.norm_sqr() / peak_in));

    let metrics = match echo_metrics(&rec, cfg.t_rev) {
        Ok(m) => format!(
            "\"efficiency\":{:.6e},\"echo_center\":{},\"echo_fwhm\":{},\"input_fwhm\":{:.6e}",
            m.efficiency,
            m.echo_center.map_or("null".to_owned(), |v| format!("{v:.6e}")),
            m.echo_fwhm.map_or("null".to_owned(), |v| format!("{v:.6e}")),
            m.input_fwhm,
        ),
        Err(e) => format!(
            "\"efficiency\":null,\"metrics_error\":\"{}\"",
            e.to_string().replace('"', "'")
        ),
    };
    format!(
        "{{\"t\":{t},\"input\":{input},\"output\":{output},\"t_rev\":{},{metrics}}}",
        cfg.t_rev
    )
}

/// Bandwidth and peak scattering rate versus wavelength at fixed intensity.
/// Wavelengths inside one linewidth of a hyperfine resonance yield nulls.
#[wasm_bindgen]
pub fn bandwidth_scan(
    lambda_min_nm: f64,
    lambda_max_nm: f64,
    points: u32,
    intensity_w_m2: f64,
    polarization: i32,
) -> String {
    let range_ok = lambda_min_nm.is_finite() && lambda_min_nm > 0.0 && lambda_max_nm.is_finite() && lambda_max_nm > lambda_min_nm;
    if !range_ok || points < 2 {
        return json_error("need 0 < lambda_min < lambda_max and at least 2 points");
    }
    let line = rb87_d1();
    let n = points.min(2000) as usize;
    let mut lambdas = Vec::with_capacity(n);
    let mut bws = Vec::with_capacity(n);
    let mut rates = Vec::with_capacity(n);
    for i in 0..n {
        let nm = lambda_min_nm + (lambda_max_nm - lambda_min_nm) * i as f64 / (n - 1) as f64;
        lambdas.push(nm);
        let beam = match StarkBeam::new(nm * 1e-9, intensity_w_m2, polarization) {
            Ok(b) => b,
            Err(e) => return json_error(&e.to_string()),
        };
        match ground_state_shift(&beam, &line).and_then(|s| memory_bandwidth(&s)) {
            Ok(bw) => bws.push(bw.total / TWO_PI / 1e6),
            Err(_) => bws.push(f64::NAN), // resonant: emitted as null
        }
        match scattering_rate(&beam, &line) {
            Ok(sc) => rates.push(sc.max / TWO_PI / 1e3),
            Err(_) => rates.push(f64::NAN),
        }
    }
    format!(
        "{{\"lambda_nm\":{},\"bandwidth_mhz\":{},\"scattering_khz\":{}}}",
        json_numbers(lambdas.into_iter()),
        json_numbers(bws.into_iter()),
        json_numbers(rates.into_iter()),
    )
}
