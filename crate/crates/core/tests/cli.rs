use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nematic-flow")).args(args).env("NEMATIC_FLOW_THREADS", "1").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("case.conf");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn validate_accepts_admissible_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "k1 = 1\nk2 = 1\nk3 = 1\nk4 = 0\nalpha1 = 0\nalpha2 = -1\nalpha3 = 1\nalpha4 = 1\nalpha5 = 0\nalpha6 = 0\n",
    );
    let o = bin(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let line = stdout(&o).lines().find(|l| l.contains("coercivity")).unwrap().to_owned();
    let c: f64 = line.rsplit(' ').next().unwrap().parse().unwrap();
    assert!((c - 2.0).abs() < 1e-9, "{line}");
}

#[test]
fn validate_reports_the_violated_inequality() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "k4 = 1.5\n");
    let o = bin(&["validate", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("k2 > |k4|"), "{}", stderr(&o));
}

#[test]
fn gradcheck_passes_with_defaults() {
    let o = bin(&["gradcheck", "--seed", "7", "--trials", "2", "--override", "nx=32", "--override", "ny=32"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let err: f64 = stdout(&o).trim().rsplit(' ').next().unwrap().parse().unwrap();
    assert!(err <= 1e-6);
}

#[test]
fn dumped_config_reloads_to_the_same_dump() {
    let dir = tempfile::tempdir().unwrap();
    let first = bin(&["info", "--dump-config", "--override", "epsilon=0.3", "--override", "scheme=imex"]);
    assert_eq!(first.status.code(), Some(0));
    let cfg = write_config(dir.path(), &stdout(&first));
    let second = bin(&["info", "--dump-config", "--config", &cfg]);
    assert_eq!(stdout(&first), stdout(&second));
    assert!(stdout(&first).contains("epsilon = 0.3"));
}

#[test]
fn run_writes_diagnostics_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!("nx = 16\nny = 16\ndt = 1e-3\nt_end = 0.01\nsnapshot_every = 5\nout_dir = {}\n", out.display()),
    );
    let o = bin(&["run", "--config", &cfg, "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    let snaps =
        fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path() != out.join("diagnostics.csv")).count();
    assert!(snaps >= 2);
}

#[test]
fn sweep_and_order_study_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(
        dir.path(),
        &format!(
            "nx = 16\nny = 16\nscheme = imex\ndt = 1e-3\nt_end = 0.01\ninitial = twist\nout_dir = {}\n",
            out.display()
        ),
    );
    let o = bin(&["sweep", "--config", &cfg, "--eps", "0.4,0.2", "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("sweep_report.csv").exists() && out.join("sweep_summary.csv").exists());
    let o = bin(&["order-study", "--config", &cfg, "--dt-list", "1e-3,5e-4,2.5e-4", "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(out.join("order_study.csv").exists());
    let o = bin(&["sweep", "--config", &cfg, "--eps", "0.2,0.4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_and_unreadable_configs() {
    assert_eq!(bin(&["run"]).status.code(), Some(1));
    let o = bin(&["run", "--config", "/nonexistent/case.conf"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("/nonexistent/case.conf"));
    assert_eq!(bin(&["run", "--config", "x", "--override", "nonsense"]).status.code(), Some(3));
    assert_eq!(bin(&["info", "--override", "nonsense"]).status.code(), Some(1));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(1));
}
