//! `asgem` command line: Wigner symbols, ac Stark shift tables, parameter
//! maps, and gradient-echo storage simulations.
//!
//! Exit codes: 0 ok, 2 usage, 3 physics-domain error, 4 output conflict,
//! 5 truncated echo window.

mod util;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use asgem::datafile::KeyValueFile;
use asgem::halfint::HalfInt;
use asgem::mb::{self, SimulationConfig};
use asgem::stark::{self, StarkBeam};
use asgem::sweep::{AxisSpec, Cell, ContourResult, SweepOptions};
use asgem::wigner::{wigner_3j, wigner_6j, AngularError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use util::{
    display_linear_frequency, format_sig, parse_frequency, parse_grid, parse_intensity,
    parse_length, parse_range, resolve_line, write_manifest,
};

#[derive(Parser)]
#[command(name = "asgem", version, about = "ac Stark gradient echo memory toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a Wigner 3j or 6j symbol (arguments accept half-integers like 3/2)
    Wigner {
        #[arg(value_enum)]
        kind: SymbolKind,
        /// j1 j2 j3 m1 m2 m3 for 3j, or j1 j2 j3 j4 j5 j6 for 6j
        #[arg(num_args = 6, allow_hyphen_values = true)]
        args: Vec<HalfInt>,
    },
    /// Per-sublevel light shifts, memory bandwidth, and scattering rate
    Stark(StarkArgs),
    /// 2-D parameter maps with checkpointing and contour extraction
    #[command(subcommand)]
    Map(MapCommand),
    /// One gradient-echo storage/retrieval run
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SymbolKind {
    #[value(name = "3j")]
    ThreeJ,
    #[value(name = "6j")]
    SixJ,
}

#[derive(Args)]
struct StarkArgs {
    /// Stark beam wavelength, e.g. 1064nm
    #[arg(long)]
    wavelength: String,
    /// Stark beam intensity in W/m^2, e.g. 5e13
    #[arg(long)]
    intensity: String,
    /// Spherical polarization component: -1, 0, or 1
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    polarization: i32,
    /// Atomic line data file (default: built-in rb87 d1)
    #[arg(long)]
    line_file: Option<PathBuf>,
    /// Include the counter-rotating 1/(w_l + w) term
    #[arg(long)]
    counter_rotating: bool,
    /// Write the per-sublevel table as CSV
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MapCommand {
    /// Memory bandwidth over (wavelength x intensity)
    StarkBw(StarkMapArgs),
    /// Maximum scattering rate over (wavelength x intensity)
    StarkScatter(StarkMapArgs),
    /// Storage efficiency R over (xi x zeta)
    Efficiency(EfficiencyMapArgs),
}

#[derive(Args)]
struct MapCommonArgs {
    /// Grid size NxM (x-axis count first), e.g. 40x40
    #[arg(long)]
    grid: String,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for cell evaluation (0 = all cores)
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Resume from the checkpoint in the output directory
    #[arg(long)]
    resume: bool,
    /// Overwrite an existing output directory / discard a checkpoint
    #[arg(long)]
    force: bool,
    /// Contour levels to extract (comma separated, map-specific units)
    #[arg(long)]
    levels: Option<String>,
    /// Checkpoint interval in cells
    #[arg(long, default_value_t = 16)]
    checkpoint_every: usize,
}

#[derive(Args)]
struct StarkMapArgs {
    /// Wavelength range MIN:MAX (linear spacing), e.g. 900nm:1300nm
    #[arg(long)]
    lambda: String,
    /// Intensity range MIN:MAX in W/m^2 (log spacing), e.g. 1e12:1e15
    #[arg(long)]
    intensity: String,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    polarization: i32,
    #[arg(long)]
    line_file: Option<PathBuf>,
    #[command(flatten)]
    common: MapCommonArgs,
}

#[derive(Args)]
struct EfficiencyMapArgs {
    /// Optical depth range MIN:MAX, e.g. 100:4000
    #[arg(long)]
    xi: String,
    /// Gradient strength range MIN:MAX, e.g. 100:2500
    #[arg(long)]
    zeta: String,
    /// Base simulation config file (key = value unit)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Spatial grid points per run
    #[arg(long)]
    nz: Option<usize>,
    /// Time samples per run
    #[arg(long)]
    nt: Option<usize>,
    /// Simulation window end, tau
    #[arg(long)]
    t_max: Option<f64>,
    #[command(flatten)]
    common: MapCommonArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Optical depth xi
    #[arg(long)]
    xi: Option<f64>,
    /// Gradient strength zeta
    #[arg(long)]
    zeta: Option<f64>,
    /// Reversal time, tau
    #[arg(long)]
    t_rev: Option<f64>,
    /// Window end, tau
    #[arg(long)]
    t_max: Option<f64>,
    /// Pulse center, tau
    #[arg(long)]
    t0: Option<f64>,
    /// Pulse width kappa, tau
    #[arg(long)]
    kappa: Option<f64>,
    /// Excited-state linewidth Gamma (sets the time unit), e.g. 5MHz
    #[arg(long)]
    linewidth: Option<String>,
    /// Ground-state decoherence rate, e.g. 0Hz
    #[arg(long)]
    decoherence: Option<String>,
    /// Probe detuning, e.g. 200MHz
    #[arg(long)]
    delta_p: Option<String>,
    /// Control detuning, e.g. 50MHz
    #[arg(long)]
    delta_c: Option<String>,
    /// Probe peak Rabi frequency, e.g. 5kHz
    #[arg(long)]
    probe_amp: Option<String>,
    /// Constant control Rabi frequency for zeta = 0 runs, e.g. 500MHz
    #[arg(long)]
    control_rabi: Option<String>,
    /// Spatial grid points
    #[arg(long)]
    nz: Option<usize>,
    /// Time samples
    #[arg(long)]
    nt: Option<usize>,
    /// Keep the control sign fixed (dephasing-only comparison run)
    #[arg(long)]
    no_reversal: bool,
    /// Config file (key = value unit); command-line flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for trace.csv and manifest.txt
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump the full probe grid as binary (implies grid storage)
    #[arg(long)]
    dump_grid: bool,
}

// error carrier that pins a specific process exit code
#[derive(Debug)]
struct ExitWith(u8, String);

impl std::fmt::Display for ExitWith {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.1)
    }
}

impl std::error::Error for ExitWith {}

fn physics_err(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ExitWith(3, msg.into()))
}

fn conflict_err(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ExitWith(4, msg.into()))
}

fn truncation_err(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ExitWith(5, msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<ExitWith>().map(|e| e.0).unwrap_or(1);
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Wigner { kind, args } => cmd_wigner(kind, &args),
        Command::Stark(args) => cmd_stark(args),
        Command::Map(map) => match map {
            MapCommand::StarkBw(args) => cmd_stark_map(args, true),
            MapCommand::StarkScatter(args) => cmd_stark_map(args, false),
            MapCommand::Efficiency(args) => cmd_efficiency_map(args),
        },
        Command::Simulate(args) => cmd_simulate(args),
    }
}

fn cmd_wigner(kind: SymbolKind, args: &[HalfInt]) -> Result<()> {
    let a = args;
    let value = match kind {
        SymbolKind::ThreeJ => wigner_3j(a[0], a[1], a[2], a[3], a[4], a[5]),
        SymbolKind::SixJ => wigner_6j(a[0], a[1], a[2], a[3], a[4], a[5]),
    };
    match value {
        Ok(v) => {
            println!("{}", format_sig(v, 15));
            Ok(())
        }
        Err(e @ AngularError::InvalidPair { .. }) | Err(e @ AngularError::NegativeMagnitude(_)) => {
            Err(physics_err(e.to_string()))
        }
    }
}

fn cmd_stark(args: StarkArgs) -> Result<()> {
    let wavelength = parse_length(&args.wavelength)?;
    let intensity = parse_intensity(&args.intensity)?;
    let line = resolve_line(args.line_file.as_deref(), "rb87", "d1")?;
    let beam = StarkBeam::new(wavelength, intensity, args.polarization)
        .map_err(|e| physics_err(e.to_string()))?;

    let opts = stark::ShiftOptions {
        counter_rotating: args.counter_rotating,
    };
    let shifts = stark::ground_state_shift_with(&beam, &line, opts)
        .map_err(|e| physics_err(e.to_string()))?;
    let scatter = stark::scattering_rate(&beam, &line).map_err(|e| physics_err(e.to_string()))?;
    let bandwidth = stark::memory_bandwidth(&shifts).map_err(|e| physics_err(e.to_string()))?;

    println!(
        "ac Stark shifts: {} {} | lambda = {} m, I = {} W/m^2, q = {}, detuning = {}",
        line.species.name,
        line.label,
        format_sig(wavelength, 6),
        format_sig(intensity, 6),
        args.polarization,
        display_linear_frequency(shifts.detuning),
    );
    println!("  F     m_F    shift            scattering");
    for (&(f, m, shift), &(_, _, rate)) in shifts.shifts.iter().zip(scatter.rates.iter()) {
        println!(
            "  {:<6}{:<7}{:<17}{}",
            f.to_string(),
            m.to_string(),
            display_linear_frequency(shift),
            display_linear_frequency(rate)
        );
    }
    println!(
        "bandwidth: |d20 - d10| = {}, spread(F=1) = {}, spread(F=2) = {}",
        display_linear_frequency(bandwidth.clock_shift.abs()),
        display_linear_frequency(bandwidth.spread_f1),
        display_linear_frequency(bandwidth.spread_f2),
    );
    println!("Delta_bw = {}", display_linear_frequency(bandwidth.total));
    println!("max Gamma_sc = {}", display_linear_frequency(scatter.max));

    if let Some(path) = &args.out {
        let mut csv = String::from("F,m_F,shift_rad_s,scattering_rad_s\n");
        for (&(f, m, shift), &(_, _, rate)) in shifts.shifts.iter().zip(scatter.rates.iter()) {
            csv.push_str(&format!("{f},{m},{shift},{rate}\n"));
        }
        std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Prepares the map output directory, honoring --resume/--force; returns the
/// checkpoint path.
fn prepare_out_dir(common: &MapCommonArgs) -> Result<PathBuf> {
    let dir = &common.out;
    let checkpoint = dir.join("checkpoint.csv");
    if dir.exists() {
        let complete = dir.join("values.csv").exists();
        if common.force {
            for name in ["values.csv", "contours.csv", "manifest.txt", "failures.log"] {
                let _ = std::fs::remove_file(dir.join(name));
            }
            let _ = std::fs::remove_file(&checkpoint);
            let _ = std::fs::remove_file(dir.join("checkpoint.csv.failures.log"));
        } else if complete {
            return Err(conflict_err(format!(
                "{} already holds a finished run (values.csv); use --force to overwrite",
                dir.display()
            )));
        } else if !common.resume && checkpoint.exists() {
            return Err(conflict_err(format!(
                "{} holds a checkpoint; pass --resume to continue or --force to restart",
                dir.display()
            )));
        }
    } else {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(checkpoint)
}

fn parse_levels(
    arg: &Option<String>,
    parse: impl Fn(&str) -> Result<f64>,
    default: &[f64],
) -> Result<Vec<f64>> {
    match arg {
        None => Ok(default.to_vec()),
        Some(s) => s.split(',').map(|part| parse(part.trim())).collect(),
    }
}

fn finish_map(
    common: &MapCommonArgs,
    command: &str,
    config_lines: Vec<String>,
    result: &ContourResult,
) -> Result<()> {
    let dir = &common.out;
    let mut outputs = vec!["values.csv".to_owned(), "contours.csv".to_owned()];
    std::fs::write(dir.join("values.csv"), result.to_value_csv())?;
    std::fs::write(dir.join("contours.csv"), result.to_contour_csv())?;
    let failures = result.failure_log();
    if !failures.is_empty() {
        std::fs::write(dir.join("failures.log"), &failures)?;
        outputs.push("failures.log".to_owned());
    }
    write_manifest(dir, command, &config_lines, &outputs)?;

    let (done, masked, failed) = result.cells.iter().fold((0, 0, 0), |acc, c| match c {
        Cell::Done(_) => (acc.0 + 1, acc.1, acc.2),
        Cell::Masked => (acc.0, acc.1 + 1, acc.2),
        Cell::Failed(_) => (acc.0, acc.1, acc.2 + 1),
        Cell::Pending => acc,
    });
    print!("{done} done, {masked} masked, {failed} failed");
    match (result.min_cell(), result.max_cell()) {
        (Some((_, _, lo)), Some((x, y, hi))) => {
            println!(
                "; min = {}, max = {} at ({}, {})",
                format_sig(lo, 6),
                format_sig(hi, 6),
                format_sig(x, 6),
                format_sig(y, 6)
            );
        }
        _ => println!("; no finished cells"),
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn nearest_cell_value(result: &ContourResult, x: f64, y: f64) -> Option<(f64, f64, f64)> {
    let ix = nearest_index(&result.grid.x, x)?;
    let iy = nearest_index(&result.grid.y, y)?;
    match result.cell(ix, iy) {
        Cell::Done(v) => Some((result.grid.x[ix], result.grid.y[iy], *v)),
        _ => None,
    }
}

fn nearest_index(axis: &[f64], target: f64) -> Option<usize> {
    axis.iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1 - target)
                .abs()
                .partial_cmp(&(b.1 - target).abs())
                .expect("finite axis")
        })
        .map(|(i, _)| i)
}

fn cmd_stark_map(args: StarkMapArgs, bandwidth: bool) -> Result<()> {
    let (lmin, lmax) = parse_range(&args.lambda, parse_length)?;
    let (imin, imax) = parse_range(&args.intensity, parse_intensity)?;
    let (nx, ny) = parse_grid(&args.common.grid)?;
    let line = resolve_line(args.line_file.as_deref(), "rb87", "d1")?;
    let checkpoint = prepare_out_dir(&args.common)?;

    let lambda_axis = AxisSpec::linear(lmin, lmax, nx);
    let intensity_axis = AxisSpec::log(imin, imax, ny);
    let default_level = if bandwidth {
        stark::BANDWIDTH_LEVEL
    } else {
        stark::SCATTERING_LEVEL
    };
    let levels = parse_levels(&args.common.levels, parse_frequency, &[default_level])?;

    let opts = SweepOptions {
        checkpoint: Some(checkpoint),
        checkpoint_every: args.common.checkpoint_every,
        workers: args.common.workers,
        resume: args.common.resume,
        stop_after: None,
        value_name: "value_rad_s".to_owned(),
    };
    let result = if bandwidth {
        stark::bandwidth_map(
            &lambda_axis,
            &intensity_axis,
            args.polarization,
            &line,
            &levels,
            &opts,
        )
    } else {
        stark::scattering_map(
            &lambda_axis,
            &intensity_axis,
            args.polarization,
            &line,
            &levels,
            &opts,
        )
    }
    .map_err(|e| anyhow!("{e}"))?;

    let kind = if bandwidth { "stark-bw" } else { "stark-scatter" };
    let config_lines = vec![
        format!("lambda_min = {lmin} m"),
        format!("lambda_max = {lmax} m"),
        format!("intensity_min = {imin} W/m2"),
        format!("intensity_max = {imax} W/m2"),
        format!("grid = {nx}x{ny}"),
        format!("polarization = {}", args.polarization),
        format!(
            "levels_rad_s = {}",
            levels
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ),
        format!("line = {} {}", line.species.name, line.label),
    ];
    finish_map(&args.common, &format!("map {kind}"), config_lines, &result)?;

    // anchor check: lambda = 1064 nm, I = 5e13 W/m^2
    let (ax, ay) = (1.064e-6, 5e13);
    if lmin <= ax && ax <= lmax && imin <= ay && ay <= imax {
        if let Some((x, y, v)) = nearest_cell_value(&result, ax, ay) {
            let quote = if bandwidth { "1 GHz" } else { "1 MHz" };
            println!(
                "anchor check: nearest cell ({} m, {} W/m^2) = {} (published reading at 1064 nm, 5e13 W/m^2: {quote})",
                format_sig(x, 6),
                format_sig(y, 6),
                display_linear_frequency(v)
            );
        }
    }
    Ok(())
}

fn cmd_efficiency_map(args: EfficiencyMapArgs) -> Result<()> {
    let (xmin, xmax) = parse_range(&args.xi, |s| Ok(s.parse()?))?;
    let (zmin, zmax) = parse_range(&args.zeta, |s| Ok(s.parse()?))?;
    let (nx, ny) = parse_grid(&args.common.grid)?;
    let checkpoint = prepare_out_dir(&args.common)?;

    let mut base = SimulationConfig::default();
    if let Some(path) = &args.config {
        apply_config_file(&mut base, path)?;
    }
    if let Some(nz) = args.nz {
        base.nz = nz;
    }
    if let Some(nt) = args.nt {
        base.nt = nt;
    }
    if let Some(t_max) = args.t_max {
        base.t_max = t_max;
    }

    let levels = parse_levels(&args.common.levels, |s| Ok(s.parse()?), &[0.25, 0.5, 0.75, 0.9])?;
    let opts = SweepOptions {
        checkpoint: Some(checkpoint),
        checkpoint_every: args.common.checkpoint_every,
        workers: args.common.workers,
        resume: args.common.resume,
        stop_after: None,
        value_name: "R".to_owned(),
    };
    let result = mb::efficiency_map(
        &AxisSpec::linear(xmin, xmax, nx),
        &AxisSpec::linear(zmin, zmax, ny),
        &base,
        &levels,
        &opts,
    )
    .map_err(|e| anyhow!("{e}"))?;

    let mut config_lines = vec![
        format!("xi_min = {xmin}"),
        format!("xi_max = {xmax}"),
        format!("zeta_min = {zmin}"),
        format!("zeta_max = {zmax}"),
        format!("grid = {nx}x{ny}"),
        format!(
            "levels = {}",
            levels
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ),
    ];
    config_lines.extend(sim_config_lines(&base, true));
    finish_map(&args.common, "map efficiency", config_lines, &result)?;

    if let Some((x, y, v)) = result.max_cell() {
        if v > 0.9 {
            println!(
                "R > 0.90 region present: max R = {} at (xi = {}, zeta = {})",
                format_sig(v, 4),
                format_sig(x, 6),
                format_sig(y, 6)
            );
        } else {
            println!(
                "no cell exceeds R = 0.90 (max = {} at xi = {}, zeta = {})",
                format_sig(v, 4),
                format_sig(x, 6),
                format_sig(y, 6)
            );
        }
    }
    // anchor check: (xi, zeta) = (2500, 1250)
    if xmin <= 2500.0 && 2500.0 <= xmax && zmin <= 1250.0 && 1250.0 <= zmax {
        if let Some((x, y, v)) = nearest_cell_value(&result, 2500.0, 1250.0) {
            println!(
                "anchor check: nearest cell (xi = {}, zeta = {}) has R = {} (published reading: around 0.75)",
                format_sig(x, 6),
                format_sig(y, 6),
                format_sig(v, 4)
            );
        }
    }
    Ok(())
}

/// Serializes the resolved simulation config as `key = value` lines (the
/// manifest doubles as a `--config` file).
fn sim_config_lines(cfg: &SimulationConfig, for_map: bool) -> Vec<String> {
    let mut lines = vec![];
    if !for_map {
        lines.push(format!("xi = {}", cfg.xi));
        lines.push(format!("zeta = {}", cfg.zeta));
    }
    lines.extend([
        format!("linewidth = {} rad/s", cfg.gamma),
        format!("decoherence = {} rad/s", cfg.gamma_dec),
        format!("delta_p = {} rad/s", cfg.delta_p),
        format!("delta_c = {} rad/s", cfg.delta_c),
        format!("probe_amp = {} rad/s", cfg.probe_amp),
        format!("control_rabi = {} rad/s", cfg.control_rabi),
        format!("t0 = {} tau", cfg.t0),
        format!("kappa = {} tau", cfg.kappa),
        format!("t_rev = {} tau", cfg.t_rev),
        format!("t_max = {} tau", cfg.t_max),
        format!("nz = {}", cfg.nz),
        format!("nt = {}", cfg.nt),
        format!("reversal = {}", if cfg.reversal { 1 } else { 0 }),
    ]);
    lines
}

/// Applies a `key = value unit` config file to a simulation config.
fn apply_config_file(cfg: &mut SimulationConfig, path: &Path) -> Result<()> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = KeyValueFile::parse(&text)?;
    for (key, line_no) in file.keys() {
        match key {
            "xi" | "zeta" | "t0" | "kappa" | "t_rev" | "t_max" | "nz" | "nt" | "reversal" => {}
            "linewidth" | "decoherence" | "delta_p" | "delta_c" | "probe_amp" | "control_rabi" => {}
            other => bail!(
                "{}: unknown config key `{other}` (line {line_no})",
                path.display()
            ),
        }
    }
    if let Some(v) = file.get_number("xi")? {
        cfg.xi = v;
    }
    if let Some(v) = file.get_number("zeta")? {
        cfg.zeta = v;
    }
    if let Some(v) = file.get_angular_frequency("linewidth")? {
        cfg.gamma = v;
    }
    if let Some(v) = file.get_angular_frequency("decoherence")? {
        cfg.gamma_dec = v;
    }
    if let Some(v) = file.get_angular_frequency("delta_p")? {
        cfg.delta_p = v;
    }
    if let Some(v) = file.get_angular_frequency("delta_c")? {
        cfg.delta_c = v;
    }
    if let Some(v) = file.get_angular_frequency("probe_amp")? {
        cfg.probe_amp = v;
    }
    if let Some(v) = file.get_angular_frequency("control_rabi")? {
        cfg.control_rabi = v;
    }
    if let Some(v) = file.get_number("t0")? {
        cfg.t0 = v;
    }
    if let Some(v) = file.get_number("kappa")? {
        cfg.kappa = v;
    }
    if let Some(v) = file.get_number("t_rev")? {
        cfg.t_rev = v;
    }
    if let Some(v) = file.get_number("t_max")? {
        cfg.t_max = v;
    }
    if let Some(v) = file.get_number("nz")? {
        cfg.nz = v as usize;
    }
    if let Some(v) = file.get_number("nt")? {
        cfg.nt = v as usize;
    }
    if let Some(v) = file.get_number("reversal")? {
        cfg.reversal = v != 0.0;
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let mut cfg = SimulationConfig::default();
    if let Some(path) = &args.config {
        apply_config_file(&mut cfg, path)?;
    }
    // flags win over the config file
    if let Some(v) = args.xi {
        cfg.xi = v;
    }
    if let Some(v) = args.zeta {
        cfg.zeta = v;
    }
    if let Some(v) = args.t_rev {
        cfg.t_rev = v;
    }
    if let Some(v) = args.t_max {
        cfg.t_max = v;
    }
    if let Some(v) = args.t0 {
        cfg.t0 = v;
    }
    if let Some(v) = args.kappa {
        cfg.kappa = v;
    }
    if let Some(s) = &args.linewidth {
        cfg.gamma = parse_frequency(s)?;
    }
    if let Some(s) = &args.decoherence {
        cfg.gamma_dec = parse_frequency(s)?;
    }
    if let Some(s) = &args.delta_p {
        cfg.delta_p = parse_frequency(s)?;
    }
    if let Some(s) = &args.delta_c {
        cfg.delta_c = parse_frequency(s)?;
    }
    if let Some(s) = &args.probe_amp {
        cfg.probe_amp = parse_frequency(s)?;
    }
    if let Some(s) = &args.control_rabi {
        cfg.control_rabi = parse_frequency(s)?;
    }
    if let Some(v) = args.nz {
        cfg.nz = v;
    }
    if let Some(v) = args.nt {
        cfg.nt = v;
    }
    if args.no_reversal {
        cfg.reversal = false;
    }
    cfg.store_grids = args.dump_grid;

    let record = mb::simulate(&cfg).map_err(|e| match e {
        mb::SimError::Config(_) => physics_err(e.to_string()),
        other => anyhow!("{other}"),
    })?;
    for w in &record.warnings {
        eprintln!("warning: {w}");
    }

    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        std::fs::write(dir.join("trace.csv"), record.to_trace_csv())?;
        let mut outputs = vec!["trace.csv".to_owned()];
        if let Some(bytes) = record.grid_dump_bytes() {
            std::fs::write(dir.join("grid.bin"), bytes)?;
            outputs.push("grid.bin".to_owned());
        }
        write_manifest(dir, "simulate", &sim_config_lines(&cfg, false), &outputs)?;
        println!("wrote {}", dir.display());
    }

    match mb::echo_metrics(&record, cfg.t_rev) {
        Ok(m) => {
            println!("R = {}", format_sig(m.efficiency, 6));
            match m.echo_center {
                Some(c) => println!("echo center = {} tau", format_sig(c, 6)),
                None => println!("echo center = (no echo)"),
            }
            match m.echo_fwhm {
                Some(w) => println!(
                    "echo FWHM = {} tau (input {} tau)",
                    format_sig(w, 6),
                    format_sig(m.input_fwhm, 6)
                ),
                None => println!("echo FWHM = (no echo)"),
            }
            Ok(())
        }
        Err(e @ mb::SimError::Truncated { .. }) => Err(truncation_err(format!(
            "{e}; re-run with a larger --t-max"
        ))),
        Err(e) => Err(anyhow!("{e}")),
    }
}
