//! Argument parsing, number formatting, and manifest helpers.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use asgem::atom::AtomicLine;
use asgem::consts::TWO_PI;
use asgem::datafile::{frequency_unit_to_rad_s, length_unit_to_m, split_number_unit};

/// `"1064nm"`, `"1.064um"`, `"1.064e-6"` (bare = metres) -> metres.
pub fn parse_length(s: &str) -> Result<f64> {
    let (num, unit) = split_number_unit(s);
    let value: f64 = num
        .parse()
        .map_err(|_| anyhow!("cannot parse `{s}` as a length"))?;
    let factor = if unit.is_empty() {
        1.0
    } else {
        length_unit_to_m(unit).ok_or_else(|| anyhow!("unknown length unit `{unit}`"))?
    };
    Ok(value * factor)
}

/// `"200MHz"`, `"5.75 MHz"`, `"1.2e9rad/s"`, bare = Hz -> rad/s.
pub fn parse_frequency(s: &str) -> Result<f64> {
    let (num, unit) = split_number_unit(s);
    let value: f64 = num
        .parse()
        .map_err(|_| anyhow!("cannot parse `{s}` as a frequency"))?;
    let factor = if unit.is_empty() {
        TWO_PI
    } else {
        frequency_unit_to_rad_s(unit).ok_or_else(|| anyhow!("unknown frequency unit `{unit}`"))?
    };
    Ok(value * factor)
}

/// `"5e13"` or `"5e13W/m2"` -> W/m^2.
pub fn parse_intensity(s: &str) -> Result<f64> {
    let (num, unit) = split_number_unit(s);
    let value: f64 = num
        .parse()
        .map_err(|_| anyhow!("cannot parse `{s}` as an intensity"))?;
    match unit {
        "" | "W/m2" | "W/m^2" => Ok(value),
        other => bail!("unknown intensity unit `{other}` (expected W/m2)"),
    }
}

/// `"A:B"` range with a per-endpoint parser.
pub fn parse_range(s: &str, parse: impl Fn(&str) -> Result<f64>) -> Result<(f64, f64)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| anyhow!("range `{s}` must look like MIN:MAX"))?;
    Ok((parse(a.trim())?, parse(b.trim())?))
}

/// `"40x40"` -> (40, 40).
pub fn parse_grid(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| anyhow!("grid `{s}` must look like NxM"))?;
    let n = a.trim().parse().context("grid N")?;
    let m = b.trim().parse().context("grid M")?;
    if n == 0 || m == 0 {
        bail!("grid dimensions must be positive");
    }
    Ok((n, m))
}

/// Formats with `digits` significant digits, plain decimal where reasonable
/// (printf `%g` style).
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..digits as i32).contains(&mag) {
        let decimals = (digits as i32 - 1 - mag).max(0) as usize;
        trim_trailing_zeros(&format!("{:.*}", decimals, x))
    } else {
        let s = format!("{:.*e}", digits - 1, x);
        // tidy the mantissa: 1.2300000e9 -> 1.23e9
        match s.split_once('e') {
            Some((mant, exp)) => format!("{}e{}", trim_trailing_zeros(mant), exp),
            None => s,
        }
    }
}

fn trim_trailing_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_owned();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}

/// Displays an angular frequency as a linear frequency with an engineering
/// unit (the only place the 2*pi conversion happens).
pub fn display_linear_frequency(rad_s: f64) -> String {
    let hz = rad_s / TWO_PI;
    let a = hz.abs();
    let (scale, unit) = if a >= 1e12 {
        (1e12, "THz")
    } else if a >= 1e9 {
        (1e9, "GHz")
    } else if a >= 1e6 {
        (1e6, "MHz")
    } else if a >= 1e3 {
        (1e3, "kHz")
    } else {
        (1.0, "Hz")
    };
    format!("{} {unit}", format_sig(hz / scale, 6))
}

/// Resolves the working atomic line: explicit file, then `ASGEM_DATA_DIR`,
/// then the built-in registry.
pub fn resolve_line(line_file: Option<&Path>, species: &str, line: &str) -> Result<AtomicLine> {
    if let Some(path) = line_file {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading line file {}", path.display()))?;
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| line.to_owned());
        return Ok(AtomicLine::from_data_file(&label, species, &text)?);
    }
    if let Ok(dir) = std::env::var("ASGEM_DATA_DIR") {
        let candidate = PathBuf::from(dir).join(format!("{species}_{line}.txt"));
        if candidate.is_file() {
            let text = std::fs::read_to_string(&candidate)
                .with_context(|| format!("reading {}", candidate.display()))?;
            return Ok(AtomicLine::from_data_file(line, species, &text)?);
        }
    }
    Ok(asgem::atom::load_line(species, line)?)
}

/// Writes the run manifest: `# `-commented metadata followed by the fully
/// resolved configuration in `key = value` form, so the file can be fed back
/// through `--config`.
pub fn write_manifest(
    dir: &Path,
    command: &str,
    config_lines: &[String],
    outputs: &[String],
) -> Result<PathBuf> {
    let mut text = String::new();
    text.push_str(&format!("# asgem {} run manifest\n", env!("CARGO_PKG_VERSION")));
    text.push_str(&format!("# command: {command}\n"));
    text.push_str(&format!(
        "# timestamp: {}\n",
        chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
    ));
    for out in outputs {
        text.push_str(&format!("# output: {out}\n"));
    }
    for line in config_lines {
        text.push_str(line);
        text.push('\n');
    }
    let path = dir.join("manifest.txt");
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
