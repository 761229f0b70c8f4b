//! End-to-end tests of the four commands: artifacts, exit codes, byte-level
//! determinism, and the documented refusals.

use std::fs;
use std::path::Path;
use std::process::Command;

use nls_cli::csvio::read_trajectory_csv;
use nls_cli::{execute, Command as Cmd, Invocation};

fn invoke(cmd: Cmd, config: &Path, out: &Path) -> Result<(), nls_cli::CliError> {
    invoke_workers(cmd, config, out, 1)
}

fn invoke_workers(
    cmd: Cmd,
    config: &Path,
    out: &Path,
    workers: usize,
) -> Result<(), nls_cli::CliError> {
    execute(&Invocation {
        cmd,
        config_path: config.to_path_buf(),
        out_dir: out.to_path_buf(),
        workers,
        verbose: false,
    })
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("run.ini");
    fs::write(&p, text).unwrap();
    p
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).collect()
}

const SIM_OK: &str = "\
[params]
d = 1
alpha = 2
lambda = -1
[grid]
n = 256
half_length = 16
[time]
t_end = 1
dt = 1e-3
sample_every = 50
[data]
family = gaussian
amplitude = 0.5
width = 1
[outputs]
prefix = sim
";

#[test]
fn simulate_writes_series_and_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIM_OK);
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    invoke(Cmd::Simulate, &cfg, &out1).unwrap();
    invoke(Cmd::Simulate, &cfg, &out2).unwrap();

    let text1 = fs::read(out1.join("sim_series.csv")).unwrap();
    let text2 = fs::read(out2.join("sim_series.csv")).unwrap();
    assert_eq!(text1, text2, "reruns must be byte-identical");
    assert!(out1.join("sim_plots.gp").exists());

    let text = String::from_utf8(text1).unwrap();
    assert!(text.starts_with("# resolved configuration\n"));
    let rows = read_trajectory_csv(&text).unwrap();
    assert_eq!(rows.len(), 21, "initial sample plus 20 recorded steps");
    assert!((rows[1].t - 0.05).abs() < 1e-12);
    assert!(rows.iter().all(|r| r.e1.is_none() && r.e2.is_none()));
    // defocusing run conserves both invariants to solver precision
    let drift = (rows[20].mass - rows[0].mass).abs() / rows[0].mass;
    assert!(drift < 1e-10, "mass drift {drift}");
}

#[test]
fn companion_mode_fills_frame_energy_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "\
[params]
d = 1
alpha = 3
lambda = -1
[grid]
n = 256
half_length = 16
[time]
t_end = 0.5
dt = 1e-3
sample_every = 100
mode = companion
[data]
family = gaussian
amplitude = 0.8
[outputs]
prefix = comp
",
    );
    let out = dir.path().join("out");
    invoke(Cmd::Simulate, &cfg, &out).unwrap();
    let text = fs::read_to_string(out.join("comp_series.csv")).unwrap();
    let rows = read_trajectory_csv(&text).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.e1.is_some() && r.e2.is_some()));
    // at s = 0 the two frame energies coincide
    let r0 = &rows[0];
    assert!((r0.e1.unwrap() - r0.e2.unwrap()).abs() < 1e-12);
    // the companion plot script includes the frame-energy panel
    let script = fs::read_to_string(out.join("comp_plots.gp")).unwrap();
    assert!(script.contains("'t':'e1'"));
}

#[test]
fn simulate_divergence_exits_3_with_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "\
[params]
d = 1
alpha = 6
lambda = 1
[grid]
n = 256
half_length = 10
[time]
t_end = 2
dt = 2e-4
sample_every = 500
[data]
family = gaussian
amplitude = 1.3
[outputs]
prefix = blow
",
    );
    let out = dir.path().join("out");
    let err = invoke(Cmd::Simulate, &cfg, &out).unwrap_err();
    assert_eq!(err.exit_code(), 3, "{err}");
    // the partial series is still written for post-mortem work
    let text = fs::read_to_string(out.join("blow_series.csv")).unwrap();
    assert!(read_trajectory_csv(&text).is_ok());
}

#[test]
fn boundary_contamination_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "\
[params]
d = 1
alpha = 2
lambda = -1
[grid]
n = 128
half_length = 6
[time]
t_end = 3
dt = 1e-3
sample_every = 100
[data]
family = gaussian
amplitude = 1
[outputs]
prefix = leak
",
    );
    let out = dir.path().join("out");
    let err = invoke(Cmd::Simulate, &cfg, &out).unwrap_err();
    assert_eq!(err.exit_code(), 4, "{err}");
}

#[test]
fn stability_guard_refuses_before_stepping() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &SIM_OK.replace("dt = 1e-3", "dt = 0.1"),
    );
    let out = dir.path().join("out");
    let err = invoke(Cmd::Simulate, &cfg, &out).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("stability"), "{err}");
    assert!(!out.join("sim_series.csv").exists(), "must refuse before stepping");
}

#[test]
fn groundstate_reports_known_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "\
[params]
d = 1
alpha = 2
lambda = 1
[grid]
n = 512
half_length = 20
[data]
family = gaussian
[outputs]
prefix = gs
",
    );
    let out = dir.path().join("out");
    invoke(Cmd::Groundstate, &cfg, &out).unwrap();

    let report = fs::read_to_string(out.join("gs_groundstate.csv")).unwrap();
    let lines = data_lines(&report);
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let vals: Vec<&str> = lines[1].split(',').collect();
    let get = |name: &str| -> f64 {
        let i = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("{name}?"));
        vals[i].parse().unwrap()
    };
    // cubic power in one dimension: mass 4, gradient 4/3, C_GN = 1/sqrt(3)
    assert!((get("mass") - 4.0).abs() < 1e-6);
    assert!((get("grad_l2_sq") - 4.0 / 3.0).abs() < 1e-6);
    assert!((get("gn_constant") - 1.0 / 3.0_f64.sqrt()).abs() < 1e-6);
    assert!(get("residual") < 1e-9);
    assert!(get("pohozaev_mass_grad") < 1e-8);
    assert!(get("pohozaev_mass_pot") < 1e-8);

    let profile = fs::read_to_string(out.join("gs_profile.csv")).unwrap();
    assert_eq!(data_lines(&profile).len(), 513, "header plus one row per grid point");
}

#[test]
fn classify_scattering_run_emits_report_and_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "\
[params]
d = 1
alpha = 4
lambda = -1
[grid]
n = 1024
half_length = 128
[time]
t_end = 8
dt = 2e-3
geometric_samples = 6
[data]
family = gaussian
amplitude = 0.5
[tolerances]
cauchy_rel = 2.5e-3
[outputs]
prefix = cls
",
    );
    let out = dir.path().join("out");
    invoke(Cmd::Classify, &cfg, &out).unwrap();

    let report = fs::read_to_string(out.join("cls_report.csv")).unwrap();
    let lines = data_lines(&report);
    assert!(lines[1].starts_with("scattered,"), "row: {}", lines[1]);
    assert!(out.join("cls_cauchy.csv").exists());
    assert!(out.join("cls_scattering_state.csv").exists());
    assert!(out.join("cls_plots.gp").exists());
}

#[test]
fn sweep_over_chirp_produces_one_row_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "\
[params]
d = 1
alpha = 3
lambda = -1
[grid]
n = 512
half_length = 8
[time]
t_end = 0.5
dt = 2e-4
geometric_samples = 4
[data]
family = oscillating
amplitude = 0.5
width = 0.5
b = 1
[outputs]
prefix = swp
[sweep]
parameter = b
values = 1, 2, 4, 8
",
    );
    let out = dir.path().join("out");
    invoke_workers(Cmd::Sweep, &cfg, &out, 2).unwrap();

    let agg = fs::read_to_string(out.join("swp_sweep.csv")).unwrap();
    let lines = data_lines(&agg);
    assert_eq!(lines.len(), 5, "header plus 4 verdict rows:\n{agg}");
    for (i, b) in [1.0, 2.0, 4.0, 8.0].iter().enumerate() {
        assert!(lines[i + 1].starts_with(&format!("b,{b},")), "row: {}", lines[i + 1]);
    }
    // each lattice point owns its artifacts
    assert!(out.join("swp_b_2_report.csv").exists());
    assert!(out.join("swp_b_8_cauchy.csv").exists());
}

#[test]
fn sweep_without_sweep_section_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SIM_OK);
    let err = invoke(Cmd::Sweep, &cfg, &dir.path().join("out")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn missing_config_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = invoke(Cmd::Simulate, &dir.path().join("absent.ini"), dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 5);
}

#[test]
fn binary_maps_outcomes_to_documented_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_nls");

    // fast happy path
    let tiny = "\
[params]
d = 1
alpha = 2
lambda = -1
[grid]
n = 128
half_length = 8
[time]
t_end = 0.2
dt = 1e-3
sample_every = 20
[data]
family = gaussian
amplitude = 0.5
[outputs]
prefix = tiny
";
    let cfg = write_config(dir.path(), tiny);
    let out = dir.path().join("out");
    let ok = Command::new(bin)
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&ok.stderr));
    assert!(out.join("tiny_series.csv").exists());

    // --verbose echoes the resolved config to stdout
    let verbose = Command::new(bin)
        .args(["simulate", "--verbose", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&verbose.stdout).contains("# resolved configuration"));

    // config error: invalid alpha
    let bad = dir.path().join("bad.ini");
    fs::write(&bad, tiny.replace("alpha = 2", "alpha = -2")).unwrap();
    let code2 = Command::new(bin)
        .args(["simulate", "--config"])
        .arg(&bad)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code2.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&code2.stderr).contains("alpha"));

    // I/O error: nonexistent config path
    let code5 = Command::new(bin)
        .args(["simulate", "--config"])
        .arg(dir.path().join("nope.ini"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code5.status.code(), Some(5));

    // usage errors are exit 2 as well (flag handling)
    let usage = Command::new(bin).arg("simulate").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));

    // --help documents the exit codes
    let help = Command::new(bin).arg("--help").output().unwrap();
    let help_text = String::from_utf8_lossy(&help.stdout);
    assert!(help_text.contains("Exit codes"), "{help_text}");
    assert!(help_text.contains("4  domain-validity"), "{help_text}");
}
