use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pennyfrac::output::read_timeseries;

fn pennyfrac(args: &[&str], root: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pennyfrac"));
    cmd.args(args).env_remove("PENNYFRAC_OUTPUT_ROOT");
    if let Some(r) = root {
        cmd.env("PENNYFRAC_OUTPUT_ROOT", r);
    }
    cmd.output().unwrap()
}

fn preset(dir: &Path) -> String {
    let out = pennyfrac(&["preset"], None);
    assert!(out.status.success());
    let path = dir.join("bench.toml");
    fs::write(&path, &out.stdout).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_series_profiles_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset(dir.path());
    let out_dir = dir.path().join("out");
    let out = pennyfrac(&["run", &cfg, "--steps", "3", "--output", out_dir.to_str().unwrap()], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let series = read_timeseries(&out_dir.join("timeseries.csv")).unwrap();
    assert_eq!(series.len(), 3);
    assert!(series.windows(2).all(|w| w[1].t > w[0].t));
    assert!(out_dir.join("profiles/profile_000000.csv").exists());
    assert!(out_dir.join("profiles/profile_000003.csv").exists());
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["steps_accepted"], 3);
    assert_eq!(summary["termination"], "completed");
    // the echoed config reproduces the run
    let again = dir.path().join("again");
    let echoed = out_dir.join("config.toml");
    let out = pennyfrac(&["run", echoed.to_str().unwrap(), "--steps", "3", "--output", again.to_str().unwrap()], None);
    assert!(out.status.success());
    assert_eq!(
        fs::read(out_dir.join("timeseries.csv")).unwrap(),
        fs::read(again.join("timeseries.csv")).unwrap()
    );
}

#[test]
fn relative_output_lands_under_the_root() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset(dir.path());
    let out = pennyfrac(&["run", &cfg, "--steps", "1", "--output", "rel"], Some(dir.path()));
    assert!(out.status.success());
    assert!(dir.path().join("rel/timeseries.csv").exists());
}

#[test]
fn bad_config_exits_two_with_json() {
    let dir = tempfile::tempdir().unwrap();
    let text = pennyfrac(&["preset"], None).stdout;
    let text = String::from_utf8(text).unwrap().replace("\"4e4 N/mm^2\"", "\"4e4 furlongs\"");
    let path = dir.path().join("bad.toml");
    fs::write(&path, text).unwrap();
    let out = pennyfrac(&["--error-json", "run", path.to_str().unwrap()], Some(dir.path()));
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["exit_code"], 2);
    assert!(err["message"].as_str().unwrap().contains("material"), "{err}");
}

#[test]
fn missing_config_is_an_io_error() {
    let out = pennyfrac(&["run", "/nonexistent/cfg.toml"], None);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn kernel_table_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset(dir.path());
    let out = pennyfrac(&["kernel-table", &cfg, "--per-element", "1"], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,k,A,dA_dr,dA_da,dA_dl"));
    // 20 query radii over [0, a) times 11 hats
    assert_eq!(lines.count(), 20 * 11);
}

#[test]
fn sweep_makes_one_directory_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = preset(dir.path());
    let out = pennyfrac(
        &[
            "sweep",
            &cfg,
            "--param",
            "material.plane_strain_modulus",
            "--values",
            "4e2 MPa,4e6 MPa",
            "--steps",
            "1",
            "--output",
            "sw",
        ],
        Some(dir.path()),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let names: Vec<_> = fs::read_dir(dir.path().join("sw"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(names.len(), 2, "{names:?}");
    assert!(names.iter().all(|n| n.starts_with("material.plane_strain_modulus=")));
}
