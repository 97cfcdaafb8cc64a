use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ccshock(dir: &Path, config: &str, command: &str) -> Output {
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_ccshock"))
        .args(["--config", cfg.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap(), "--command", command])
        .output()
        .unwrap()
}

fn report_value(dir: &Path, key: &str) -> String {
    let text = fs::read_to_string(dir.join("out/report.txt")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
        .unwrap_or_else(|| panic!("{key} missing from\n{text}"))
}

#[test]
fn aux_table_has_the_flat_zero_row() {
    let d = tempfile::tempdir().unwrap();
    let out = ccshock(d.path(), "flux = cubic\nentropy = quadratic\n", "aux");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(d.path().join("out/aux.csv")).unwrap();
    let row = csv.lines().find(|l| l.starts_with("1.0000000000000000e0,")).unwrap();
    let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
    assert!((cols[1] + 0.5).abs() < 1e-12);
    assert!((cols[2] + 1.0).abs() < 1e-9);
    let manifest = fs::read_to_string(d.path().join("out/manifest.txt")).unwrap();
    assert!(manifest.contains("config_hash = ") && manifest.contains("aux.csv = "));
}

#[test]
fn unknown_command_prints_usage() {
    let d = tempfile::tempdir().unwrap();
    let out = ccshock(d.path(), "", "plot");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("usage: ccshock"));
    let out = Command::new(env!("CARGO_BIN_EXE_ccshock")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_errors_are_listed_with_lines() {
    let d = tempfile::tempdir().unwrap();
    let out = ccshock(d.path(), "eps = -1\nwhat = 3\n", "aux");
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1: eps must be positive"), "{err}");
    assert!(err.contains("line 2: unknown key `what`"), "{err}");
}

#[test]
fn nonclassical_demo_reports_a_margin() {
    let d = tempfile::tempdir().unwrap();
    let out = ccshock(d.path(), "entropy = exponential\n", "nonclassical-demo");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let margin: f64 = report_value(d.path(), "margin").parse().unwrap();
    assert!(margin > 0.1, "{margin}");
}

#[test]
fn failed_construction_exits_with_a_witness() {
    // with eta = u^2 the middle state cannot sit below the classical shock
    let d = tempfile::tempdir().unwrap();
    let out = ccshock(d.path(), "entropy = quadratic\n", "nonclassical-demo");
    assert_eq!(out.status.code(), Some(2));
    assert!(d.path().join("out/witness.txt").exists());
    assert_eq!(report_value(d.path(), "status"), "failed");
}

#[test]
fn outputs_are_deterministic() {
    let cfg = "values = 0.8, 1.3, 0.6, 1.0\nbreaks = -0.5, 0.2, 0.7\nT = 0.5\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = ccshock(d.path(), cfg, "fronttrack");
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["interactions.csv", "waves.csv", "manifest.txt"] {
        assert_eq!(fs::read(a.path().join("out").join(f)).unwrap(), fs::read(b.path().join("out").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn auto_constant_runs_the_calibration() {
    let d = tempfile::tempdir().unwrap();
    let out = ccshock(d.path(), "C0 = auto\neps = 0.02\nh = 0.005\nstate_points = 256\nT = 0.1\n", "weight-trace");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = fs::read_to_string(d.path().join("out/manifest.txt")).unwrap();
    assert!(manifest.contains("plan = CalibrateSmall, Run"), "{manifest}");
    assert!(manifest.contains("\nC0 = 16\n"), "{manifest}");
}

#[test]
fn remaining_commands_run() {
    let runs = [
        ("", "admissible"),
        ("state_points = 128\nshock_samples = 2000\nu_left = 1\nu_right = 0\n", "calibrate-large"),
        ("state_points = 128\n", "calibrate-small"),
        ("state_points = 128\nshock_samples = 2000\nu_left = 1\nu_right = 0\na = 0.002\n", "dissipation-scan"),
        ("T = 0.2\ndx = 0.02\n", "reference"),
        ("u_left = 1\nu_right = 0.6\na = 0.05\nT = 0.3\ndx = 0.01\n", "shift"),
        ("mode = shifted\nT = 0.2\n", "fronttrack"),
        ("values = 0.8, 1.2, 0.7\nbreaks = -0.5, 0.25\nb_hi = 1.3\nv = 5.5\nT = 0.2\n", "cone-experiment"),
    ];
    for (cfg, cmd) in runs {
        let d = tempfile::tempdir().unwrap();
        let out = ccshock(d.path(), cfg, cmd);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(report_value(d.path(), "status"), "ok", "{cmd}");
    }
}
