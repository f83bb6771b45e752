use std::path::Path;
use std::process::{Command, Output};

fn viscospec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_viscospec"))
        .args(args)
        .output()
        .unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

const SMALL_CONTRACTION: &str = "experiment = \"contraction\"\n\
[grid]\nn = 32\n\
[integrator]\ndt = 1e-3\nt_end = 0.02\n";

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn help_lists_every_experiment() {
    let out = viscospec(&["--help"]);
    assert!(out.status.success());
    let s = text(&out.stdout);
    for sub in [
        "decay",
        "dispersion",
        "probe",
        "contraction",
        "uniqueness",
        "constraints",
    ] {
        assert!(s.contains(sub), "{sub} missing from\n{s}");
    }
}

#[test]
fn flags_override_the_preset() {
    let out = viscospec(&[
        "uniqueness",
        "--print-config",
        "--grid",
        "32",
        "--dim",
        "3",
        "--seed",
        "99",
        "--out",
        "elsewhere",
    ]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let s = text(&out.stdout);
    assert!(s.contains("experiment = \"uniqueness\""));
    assert!(s.contains("n = 32") && s.contains("dim = 3") && s.contains("seed = 99"));
    assert!(s.contains("output = \"elsewhere\""));
}

#[test]
fn passing_run_exits_zero_and_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CONTRACTION);
    let out_dir = dir.path().join("out");
    let out = viscospec(&["contraction", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}{}", text(&out.stdout), text(&out.stderr));
    assert!(text(&out.stdout).contains("[PASS] picard_contraction"));
    assert!(out_dir.join("report.txt").exists());
    assert!(out_dir.join("config.toml").exists());
}

#[test]
fn failing_verdict_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{SMALL_CONTRACTION}[integrator.picard]\nmax_iters = 1\n");
    let cfg = write_config(dir.path(), &body);
    let out_dir = dir.path().join("out");
    let out = viscospec(&["contraction", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "{}", text(&out.stdout));
    assert!(text(&out.stdout).contains("[FAIL] picard_contraction"));
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_CONTRACTION);
    let out = viscospec(&["decay", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("not \"decay\""));
    let out = viscospec(&["probe", "--grid", "48", "--print-config"]);
    assert_eq!(out.status.code(), Some(2));
    let out = viscospec(&["probe", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(2));
}
