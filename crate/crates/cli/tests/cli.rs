use std::fs;
use std::process::{Command, Output};

fn steinctrl(args: &[&str], dir: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_steinctrl")).args(args).current_dir(dir).output().unwrap()
}

#[test]
fn bench_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = steinctrl(
        &[
            "bench", "--design", "iid", "--d", "1", "--omega", "1", "--b", "1", "--n", "16,32,64", "--reps", "10",
            "--seed", "7", "--out", "r.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "estimator,d,b,omega,n,eps,mse,se,mean_estimate,fallback_count,wall_time_ms");
    assert_eq!(lines.len(), 10);
    assert!(lines[1].starts_with("MC,1,1,1,16,,"));

    let slope = steinctrl(&["slope", "--in", "r.csv", "--estimator", "CF"], dir.path());
    assert_eq!(slope.status.code(), Some(0));
    let text = String::from_utf8(slope.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    let rows = steinctrl::experiment::from_csv(&csv).unwrap();
    let (ns, ms): (Vec<usize>, Vec<f64>) =
        rows.iter().filter(|r| r.estimator == steinctrl::Estimator::CF).map(|r| (r.n, r.mse)).unzip();
    let expected = steinctrl::experiment::fit_slope(&ns, &ms).unwrap();
    assert!(text.contains(&format!("slope={expected:.6}")), "{text}");
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = steinctrl(&["bench", "--d", "1"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("Usage"));
    assert_eq!(steinctrl(&["bench", "--n", "8", "--reps", "1"], dir.path()).status.code(), Some(1));
    assert_eq!(steinctrl(&["bench", "--n", "8", "--design", "torus"], dir.path()).status.code(), Some(1));
    assert_eq!(steinctrl(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(steinctrl(&["slope", "--in", "r.csv", "--estimator", "XYZ"], dir.path()).status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(steinctrl(&["slope", "--in", "absent.csv"], dir.path()).status.code(), Some(2));
    let out = steinctrl(&["bench", "--n", "8", "--reps", "2", "--out", "no/such/dir/r.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "# torus sweep\ndesign = torus\nn = 8\neps = 0.3\nreps = 2\nformat = json\n")
        .unwrap();
    let out = steinctrl(&["bench", "--config", "run.cfg", "--n", "10", "--estimators", "MC,CF"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.trim_start().starts_with('['));
    assert_eq!(text.matches("\"estimator\"").count(), 2);
    assert!(text.contains("\"n\": 10"));
    assert!(text.contains("\"eps\": 0.3"));
}

#[test]
fn filldist_and_selftest_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = steinctrl(&["filldist", "--points", "grid", "--d", "1", "--m", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("fill_distance=0.125000000000"));
    let out = steinctrl(&["selftest"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
