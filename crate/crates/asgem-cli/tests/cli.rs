//! End-to-end tests of the `asgem` binary: output formats, exit codes, and
//! the resume/consistency contracts.

use std::path::Path;
use std::process::{Command, Output};

fn asgem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asgem"))
        .args(args)
        .output()
        .expect("spawn asgem")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        stdout(out),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn wigner_closed_forms_print_fifteen_digits() {
    let out = asgem(&["wigner", "3j", "1", "1", "0", "0", "0", "0"]);
    assert_exit(&out, 0);
    assert_eq!(stdout(&out).trim(), "-0.577350269189626");

    let out = asgem(&["wigner", "6j", "1", "1", "1", "1", "1", "1"]);
    assert_exit(&out, 0);
    assert_eq!(stdout(&out).trim(), "0.166666666666667");

    let out = asgem(&["wigner", "3j", "1", "1", "3", "0", "0", "0"]);
    assert_exit(&out, 0);
    assert_eq!(stdout(&out).trim(), "0");

    // half-integer arguments
    let out = asgem(&["wigner", "3j", "1/2", "1/2", "1", "1/2", "1/2", "-1"]);
    assert_exit(&out, 0);
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((v + 1.0 / 3f64.sqrt()).abs() < 1e-14);
}

#[test]
fn wigner_bad_input_exit_codes() {
    // unparsable half-integer: usage error
    let out = asgem(&["wigner", "3j", "1", "1", "0", "0", "0", "x"]);
    assert_exit(&out, 2);
    // invalid (j, m) pair: domain error
    let out = asgem(&["wigner", "3j", "1", "1", "1", "2", "-2", "0"]);
    assert_exit(&out, 3);
}

#[test]
fn stark_at_anchor_prints_table_and_summary() {
    let out = asgem(&["stark", "--wavelength", "1064nm", "--intensity", "5e13"]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("Delta_bw = 4.39013 MHz"), "{text}");
    assert!(text.contains("max Gamma_sc = 1.21491 kHz"), "{text}");
    // 8 sublevel rows
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with(['1', '2'])).count(), 8);
}

#[test]
fn stark_zero_intensity_is_all_zero() {
    let out = asgem(&["stark", "--wavelength", "1064nm", "--intensity", "0"]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("Delta_bw = 0 Hz"), "{text}");
    assert!(text.contains("max Gamma_sc = 0 Hz"), "{text}");
}

#[test]
fn stark_resonant_wavelength_exits_3() {
    let out = asgem(&["stark", "--wavelength", "794.98nm", "--intensity", "1e12"]);
    assert_exit(&out, 3);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("resonant"), "{err}");
    assert!(err.contains("F = 2"), "names the transition: {err}");
}

#[test]
fn stark_csv_export() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("table.csv");
    let out = asgem(&[
        "stark",
        "--wavelength",
        "1064nm",
        "--intensity",
        "5e13",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("F,m_F,shift_rad_s,scattering_rad_s\n"));
    assert_eq!(text.lines().count(), 9);
}

#[test]
fn stark_line_file_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rb87_d1.txt");
    std::fs::write(&path, asgem::atom::rb87_d1().to_data_file()).unwrap();
    let out = asgem(&[
        "stark",
        "--wavelength",
        "1064nm",
        "--intensity",
        "5e13",
        "--line-file",
        path.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("Delta_bw = 4.39013 MHz"));
}

#[test]
fn stark_respects_asgem_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    // a deliberately different line: inflate the linewidth so the result
    // differs only if the override was picked up
    let mut line = asgem::atom::rb87_d1();
    line.reduced_dipole *= 2.0;
    std::fs::write(dir.path().join("rb87_d1.txt"), line.to_data_file()).unwrap();

    let out = Command::new(env!("CARGO_BIN_EXE_asgem"))
        .env("ASGEM_DATA_DIR", dir.path())
        .args(["stark", "--wavelength", "1064nm", "--intensity", "5e13"])
        .output()
        .unwrap();
    assert_exit(&out, 0);
    // 4x the default bandwidth (shift scales with the dipole element squared)
    assert!(stdout(&out).contains("Delta_bw = 17.5605 MHz"), "{}", stdout(&out));
}

#[test]
fn simulate_prints_metrics_and_respects_probe_zero() {
    let out = asgem(&[
        "simulate", "--xi", "800", "--zeta", "600", "--nz", "96", "--nt", "2048",
    ]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("R = 0."), "{text}");
    assert!(text.contains("echo center = 0.2"), "{text}");

    let out = asgem(&[
        "simulate", "--xi", "800", "--zeta", "600", "--nz", "64", "--nt", "1024",
        "--probe-amp", "0Hz",
    ]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("R = 0\n"), "{text}");
    assert!(text.contains("echo center = (no echo)"), "{text}");
}

#[test]
fn simulate_truncated_window_exits_5() {
    let out = asgem(&[
        "simulate", "--xi", "2500", "--zeta", "1250", "--nz", "96", "--nt", "2048",
        "--t-max", "0.2",
    ]);
    assert_exit(&out, 5);
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("--t-max"), "advises a larger window: {err}");
}

#[test]
fn simulate_writes_trace_manifest_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = asgem(&[
        "simulate", "--xi", "800", "--zeta", "600", "--nz", "48", "--nt", "1024",
        "--out", out_dir.to_str().unwrap(), "--dump-grid",
    ]);
    assert_exit(&out, 0);
    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    assert!(trace.starts_with("t_tau,re_in,im_in,abs2_in,re_out,im_out,abs2_out\n"));
    let manifest = std::fs::read_to_string(out_dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("# command: simulate"));
    assert!(manifest.contains("xi = 800"));
    let grid = std::fs::read(out_dir.join("grid.bin")).unwrap();
    assert_eq!(&grid[..8], b"ASGEMGRD");

    // the manifest doubles as a config file and reproduces the run bit-exactly
    let dir2 = dir.path().join("run2");
    let out = asgem(&[
        "simulate",
        "--config",
        out_dir.join("manifest.txt").to_str().unwrap(),
        "--out",
        dir2.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let trace2 = std::fs::read_to_string(dir2.join("trace.csv")).unwrap();
    assert_eq!(trace, trace2);
}

#[test]
fn simulate_config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "xi = 800\nzeta = 600\nnz = 48\nnt = 1024\ndelta_p = 200 MHz\n",
    )
    .unwrap();
    let base = asgem(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_exit(&base, 0);
    // flags win over the file
    let over = asgem(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--zeta", "900",
    ]);
    assert_exit(&over, 0);
    assert_ne!(stdout(&base), stdout(&over));
}

#[test]
fn map_grid_1x1_matches_direct_stark() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("map");
    let out = asgem(&[
        "map", "stark-bw", "--lambda", "1064nm:1064nm", "--intensity", "5e13:5e13",
        "--grid", "1x1", "--out", out_dir.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    let values = std::fs::read_to_string(out_dir.join("values.csv")).unwrap();
    let row = values.lines().nth(1).unwrap();
    let bw: f64 = row.split(',').nth(2).unwrap().parse().unwrap();

    let line = asgem::atom::rb87_d1();
    let beam = asgem::stark::StarkBeam::new(1.064e-6, 5e13, 0).unwrap();
    let direct = asgem::stark::memory_bandwidth(
        &asgem::stark::ground_state_shift(&beam, &line).unwrap(),
    )
    .unwrap()
    .total;
    assert_eq!(bw, direct);
}

#[test]
fn map_resume_after_interrupt_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let straight_dir = dir.path().join("straight");
    let run = |extra: &[&str], out_dir: &Path| {
        let mut args = vec![
            "map",
            "stark-scatter",
            "--lambda",
            "980nm:1180nm",
            "--intensity",
            "1e12:1e14",
            "--grid",
            "5x4",
            "--out",
            out_dir.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        asgem(&args)
    };
    assert_exit(&run(&[], &straight_dir), 0);

    // fake an interrupted run: reuse the straight checkpoint with rows reset
    let resumed_dir = dir.path().join("resumed");
    std::fs::create_dir(&resumed_dir).unwrap();
    let full = std::fs::read_to_string(straight_dir.join("checkpoint.csv")).unwrap();
    let mut lines: Vec<String> = full.lines().map(str::to_owned).collect();
    for line in lines.iter_mut().skip(8) {
        let (head, _) = line.rsplit_once(',').unwrap();
        let (head, _) = head.rsplit_once(',').unwrap();
        *line = format!("{head},,pending");
    }
    std::fs::write(resumed_dir.join("checkpoint.csv"), lines.join("\n") + "\n").unwrap();
    assert_exit(&run(&["--resume"], &resumed_dir), 0);

    let a = std::fs::read_to_string(straight_dir.join("values.csv")).unwrap();
    let b = std::fs::read_to_string(resumed_dir.join("values.csv")).unwrap();
    assert_eq!(a, b);
    let a = std::fs::read_to_string(straight_dir.join("contours.csv")).unwrap();
    let b = std::fs::read_to_string(resumed_dir.join("contours.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn map_existing_output_conflicts_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("map");
    let args = [
        "map", "stark-bw", "--lambda", "1000nm:1100nm", "--intensity", "1e12:1e13",
        "--grid", "3x3", "--out", out_dir.to_str().unwrap(),
    ];
    assert_exit(&asgem(&args), 0);
    assert_exit(&asgem(&args), 4);
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_exit(&asgem(&forced), 0);
}

#[test]
fn map_workers_do_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one");
    let many = dir.path().join("many");
    for (out_dir, workers) in [(&one, "1"), (&many, "4")] {
        let out = asgem(&[
            "map", "stark-bw", "--lambda", "950nm:1250nm", "--intensity", "1e12:1e15",
            "--grid", "6x5", "--out", out_dir.to_str().unwrap(), "--workers", workers,
        ]);
        assert_exit(&out, 0);
    }
    let a = std::fs::read_to_string(one.join("values.csv")).unwrap();
    let b = std::fs::read_to_string(many.join("values.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn map_efficiency_small_grid_reports_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("eff");
    let out = asgem(&[
        "map", "efficiency", "--xi", "2500:2500", "--zeta", "1250:1250",
        "--grid", "1x1", "--out", out_dir.to_str().unwrap(), "--nz", "128", "--nt", "2048",
    ]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    assert!(text.contains("anchor check"), "{text}");
    let values = std::fs::read_to_string(out_dir.join("values.csv")).unwrap();
    assert!(values.starts_with("xi,zeta,R\n"));
    let r: f64 = values.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((0.70..=0.85).contains(&r), "R = {r}");
}
