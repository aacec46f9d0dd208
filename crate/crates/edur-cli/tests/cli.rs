//! End-to-end tests of the `edur` binary: exit codes, determinism, and
//! output schemas.

use std::process::{Command, Output};

fn edur(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edur"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

#[test]
fn sweep_exact_matches_closed_forms_at_zero_detuning() {
    let out = edur(&[
        "sweep",
        "--theta-oa",
        "0",
        "--alpha",
        "1",
        "--correction",
        "optimal",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    let header = lines.next().expect("header");
    assert!(header.starts_with("theta_oa,theta_b,alpha,branch,error,disturbance"));
    let row: Vec<&str> = lines.next().expect("one row").split(',').collect();
    assert_eq!(row[3], "optimal");
    let error: f64 = row[4].parse().unwrap();
    let disturbance: f64 = row[5].parse().unwrap();
    assert!(error.abs() < 1e-9);
    assert!((disturbance - 2.0f64.sqrt()).abs() < 1e-9);
}

#[test]
fn sweep_degrees_flag_converts_at_the_boundary() {
    let rad = edur(&["sweep", "--theta-oa", "1.5707963267948966", "--alpha", "1"]);
    let deg = edur(&["sweep", "--theta-oa", "90", "--degrees", "--alpha", "1"]);
    assert!(rad.status.success() && deg.status.success());
    assert_eq!(stdout(&rad), stdout(&deg));
}

#[test]
fn poisson_runs_are_byte_identical_for_a_fixed_seed() {
    let args = [
        "three-state",
        "--theta-oa",
        "0.8726646259971648",
        "--theta-b",
        "1.0471975511965976",
        "--alpha",
        "0.5",
        "--counts",
        "poisson:10000",
        "--seed",
        "42",
        "--format",
        "json",
    ];
    let first = edur(&args);
    let second = edur(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let mut other = args;
    other[10] = "43";
    let third = edur(&other);
    assert!(third.status.success());
    assert_ne!(first.stdout, third.stdout, "a new seed must change the sample");
}

#[test]
fn three_state_csv_writes_counts_and_summary_files() {
    let dir = tempfile::tempdir().expect("temp dir");
    let counts_path = dir.path().join("run.csv");
    let out = edur(&[
        "three-state",
        "--counts",
        "poisson",
        "--seed",
        "7",
        "--out",
        counts_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let counts = std::fs::read_to_string(&counts_path).unwrap();
    assert!(counts.starts_with("state,m,b,intensity\n"));
    // Five states, four cells each, plus the header.
    assert_eq!(counts.lines().count(), 21);
    let summary = std::fs::read_to_string(dir.path().join("run.summary.csv")).unwrap();
    assert!(summary.starts_with("theta_oa,theta_b,alpha,branch,seed"));
    assert_eq!(summary.lines().count(), 2);
}

#[test]
fn surface_coarse_grid_is_well_formed_with_exact_endpoints() {
    let out = edur(&["surface", "--step", "1.5707963267948966"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let grid_rows: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("grid,"))
        .collect();
    // vartheta in {0, pi/2, pi} x phi in {0, pi/2, pi, 3pi/2}: each
    // endpoint appears exactly once per phi value.
    assert_eq!(grid_rows.len(), 12);
    let zero_vt = grid_rows
        .iter()
        .filter(|l| l.split(',').nth(1).unwrap().starts_with("0.0000"))
        .count();
    assert_eq!(zero_vt, 4);
    assert!(text.lines().any(|l| l.starts_with("min,")));
    assert!(text.lines().any(|l| l.starts_with("max,")));
}

#[test]
fn config_file_is_used_and_flags_override_it() {
    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = dir.path().join("edur.cfg");
    std::fs::write(&cfg, "theta_oa=0\nalpha=1\ncorrection=optimal\n").unwrap();
    let from_cfg = edur(&["sweep", "--config", cfg.to_str().unwrap()]);
    let from_flags = edur(&[
        "sweep",
        "--theta-oa",
        "0",
        "--alpha",
        "1",
        "--correction",
        "optimal",
    ]);
    assert!(from_cfg.status.success());
    assert_eq!(stdout(&from_cfg), stdout(&from_flags));

    // The flag wins over the file entry.
    let overridden = edur(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--correction",
        "anti-optimal",
    ]);
    assert!(overridden.status.success());
    assert!(stdout(&overridden).contains("anti-optimal"));
    assert!(!stdout(&overridden).contains(",optimal,"));
}

#[test]
fn invalid_grid_exits_with_usage_code() {
    let out = edur(&["sweep", "--step=-0.1"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().expect("temp dir");
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "theta_oa_start=2\ntheta_oa_stop=1\n").unwrap();
    let out = edur(&["audit", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_io_code() {
    let out = edur(&[
        "sweep",
        "--theta-oa",
        "0",
        "--out",
        "/nonexistent-dir/file.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn injected_fault_fails_the_audit_with_code_one() {
    let out = edur(&["audit", "--inject-reconstruction-fault"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL"));
}

#[test]
fn audit_report_lists_every_criterion_once() {
    let dir = tempfile::tempdir().expect("temp dir");
    let report = dir.path().join("report.txt");
    let out = edur(&["audit", "--out", report.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&report).unwrap();
    for id in 1..=9 {
        assert!(
            text.contains(&format!("criterion {id} [PASS]")),
            "missing criterion {id} in report: {text}"
        );
    }
    assert!(text.trim_end().ends_with("audit: 9/9 criteria passed"));
}

#[test]
fn sweep_alpha_column_varies_while_point_is_constant() {
    let out = edur(&["sweep", "--theta-oa", "0.5", "--correction", "optimal"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 5, "five default mixtures");
    let reference: f64 = rows[0][4].parse().unwrap();
    for row in &rows {
        let error: f64 = row[4].parse().unwrap();
        assert!((error - reference).abs() < 1e-9);
    }
    let alphas: Vec<&str> = rows.iter().map(|r| r[2]).collect();
    let mut unique = alphas.clone();
    unique.dedup();
    assert_eq!(unique.len(), 5, "alpha column must vary");
}
