use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spinmem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinmem")).args(args).output().unwrap()
}

fn config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn operating_point_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("op.csv");
    let out = spinmem(&["operating-point", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let field: f64 = text
        .lines()
        .find(|l| l.starts_with("field_mG"))
        .and_then(|l| l.split_whitespace().nth(1))
        .unwrap()
        .parse()
        .unwrap();
    assert!((field - 57.0).abs() < 2.0);
    let csv = fs::read_to_string(csv).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn sweep_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let path = dir.path().join(format!("g{threads}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_spinmem"))
            .args(["sweep-gamma", "--points", "7", "--out", path.to_str().unwrap()])
            .env("RAYON_NUM_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(fs::read(path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(String::from_utf8(outputs[0].clone()).unwrap().lines().count(), 8);
}

#[test]
fn field_error_sweep_with_gnuplot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fe.csv");
    let gp = dir.path().join("fe.gp");
    let out = spinmem(&[
        "sweep-field-error",
        "--points",
        "4",
        "--db-over-b",
        "0,1e-3",
        "--out",
        csv.to_str().unwrap(),
        "--gnuplot",
        gp.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(fs::read_to_string(csv).unwrap().lines().count(), 9);
    assert!(fs::read_to_string(gp).unwrap().contains("fe.csv"));
}

#[test]
fn squeezing_sweep_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "grid_min = 0.2\ngrid_max = 1\npoints = 3\npump_ratio = 1\n");
    let out = spinmem(&["sweep-squeezing", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[2].starts_with("1.00000000e0,0.00000000e0,1.00000000e0,"));
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "gamma = 2e7\nunknown_key = 3\n");
    assert_eq!(spinmem(&["sweep-gamma", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(spinmem(&["sweep-gamma", "--points", "1"]).status.code(), Some(2));
    assert_eq!(spinmem(&["sweep-gamma", "--config", "/nonexistent/file.cfg"]).status.code(), Some(2));
    let cfg = config(dir.path(), "delta_over_gamma = 2000\n");
    assert_eq!(spinmem(&["operating-point", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(spinmem(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn invariants_pass_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "draws = 4\nparseval_draws = 1\n");
    let a = spinmem(&["invariants", "--config", &cfg, "--seed", "5"]);
    let b = spinmem(&["invariants", "--config", &cfg, "--seed", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8(a.stdout).unwrap().contains("all invariants hold"));
}

#[test]
fn invariant_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "draws = 2\nparseval_draws = 0\ncommutator_tol = 0\n");
    let out = spinmem(&["invariants", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL commutator"));
}
