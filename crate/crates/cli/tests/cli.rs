use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pt_spectra::sweep::{parse_csv_line, RowStatus, SweepRow, CSV_HEADER};
use pt_spectra::Classification;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pt-spectra"));
    cmd.env_remove("PT_SPECTRA_OUT");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<SweepRow> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    lines.map(|l| parse_csv_line(l).unwrap()).collect()
}

fn sweep_to(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name);
    let mut args = vec!["sweep", "--n-min", "1.5", "--n-max", "2.5", "--dn", "0.25", "--m2", "0", "--levels", "4", "--method", "all"];
    args.extend_from_slice(extra);
    let out = bin()
        .args(&args)
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    // WKB has no estimate below N = 2, reported as domain-error rows
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    fs::read_to_string(path).unwrap()
}

#[test]
fn harmonic_levels() {
    let out = run(&["spectrum", "--N", "2", "--levels", "3", "--method", "shoot"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    let e: Vec<f64> = rows.iter().map(|r| r.re_e.unwrap()).collect();
    assert_eq!(e.len(), 3);
    for (got, want) in e.iter().zip([1.0, 3.0, 5.0]) {
        assert!((got - want).abs() < 1e-8, "{got}");
    }
}

#[test]
fn massive_linear_levels() {
    let out = run(&["spectrum", "--N", "1", "--m2", "1", "--levels", "2", "--method", "shoot"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert!((rows[0].re_e.unwrap() - 1.25).abs() < 1e-8);
    assert!((rows[1].re_e.unwrap() - 3.25).abs() < 1e-8);
}

#[test]
fn cubic_exact_and_wkb_side_by_side() {
    let out = run(&["spectrum", "--N", "3", "--levels", "5", "--method", "all", "--format", "table"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let header = text.lines().next().unwrap();
    assert!(header.contains("shoot") && header.contains("matrix") && header.contains("wkb"));
    assert!(text.contains("1.15626707"));
    assert!(text.contains("1.09426950"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn domain_violation_exit_code() {
    let out = run(&["spectrum", "--N", "0.5", "--levels", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("n_min > 1"), "{err}");
}

#[test]
fn sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = sweep_to(dir.path(), "a.csv", &[]);
    let b = sweep_to(dir.path(), "b.csv", &[]);
    assert_eq!(a, b);
    assert!(dir.path().join("a.csv.gp").exists());
}

#[test]
fn parallel_equals_serial() {
    let dir = tempfile::tempdir().unwrap();
    let serial = sweep_to(dir.path(), "serial.csv", &["--jobs", "1"]);
    let parallel = sweep_to(dir.path(), "parallel.csv", &["--jobs", "4"]);
    assert_eq!(serial, parallel);
}

#[test]
fn rows_are_sorted() {
    let dir = tempfile::tempdir().unwrap();
    let rows = csv_rows(&sweep_to(dir.path(), "s.csv", &[]));
    for w in rows.windows(2) {
        assert!(w[0].exponent <= w[1].exponent);
        if w[0].exponent == w[1].exponent && w[1].status == RowStatus::Ok {
            assert!(w[0].re_e.unwrap() <= w[1].re_e.unwrap());
        }
    }
    let failed: Vec<&SweepRow> = rows.iter().filter(|r| r.status != RowStatus::Ok).collect();
    assert_eq!(failed.len(), 2, "WKB at N = 1.5 and 1.75");
    assert!(failed.iter().all(|r| r.status == RowStatus::DomainError && r.re_e.is_none()));
}

#[test]
fn json_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = csv_rows(&sweep_to(dir.path(), "s.csv", &[]));
    let json = sweep_to(dir.path(), "s.json", &["--format", "json"]);
    let parsed: Vec<SweepRow> = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed, csv);
    assert!(!dir.path().join("s.json.gp").exists());
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("PT_SPECTRA_OUT", dir.path())
        .args(["sweep", "--n-min", "2", "--n-max", "2", "--levels", "2", "--m2", "0"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows = csv_rows(&fs::read_to_string(dir.path().join("sweep.csv")).unwrap());
    let e: Vec<f64> = rows.iter().map(|r| r.re_e.unwrap()).collect();
    assert_eq!(e.len(), 2);
    assert!((e[0] - 1.0).abs() < 1e-8 && (e[1] - 3.0).abs() < 1e-8);
}

#[test]
fn massive_sweep_across_linear_point() {
    let out = bin()
        .args(["sweep", "--n-min", "1.0", "--n-max", "2.2", "--dn", "0.6", "--m2", "1", "--levels", "4"])
        .arg("--out")
        .arg(tempfile::tempdir().unwrap().path().join("m.csv"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn massive_rows_at_linear_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let out = bin()
        .args(["sweep", "--n-min", "1.0", "--n-max", "1.0", "--m2", "1", "--levels", "6"])
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows = csv_rows(&fs::read_to_string(path).unwrap());
    assert_eq!(rows.len(), 6);
    assert!(rows
        .iter()
        .all(|r| r.classification == Some(Classification::Real) && r.re_e.unwrap() > 0.0));
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = bin()
        .args(["sweep", "--n-min", "2", "--n-max", "2", "--levels", "1"])
        .arg("--out")
        .arg(blocker.join("sweep.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn tables_report_both_columns() {
    let out = run(&["tables"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row = text.lines().find(|l| l.trim_start().starts_with("3  2")).unwrap();
    assert!(row.contains("7.5621") && row.contains("7.56227385"));
    let row = text.lines().find(|l| l.trim_start().starts_with("1e-5")).unwrap();
    assert!(row.contains("4.8776") && row.contains("4.87769"));
    let row = text.lines().find(|l| l.trim_start().starts_with("1e-1")).unwrap();
    assert!(row.contains("1.68369"));
}

#[test]
fn merge_point_and_bracket_error() {
    let out = run(&["merge", "--pair", "1", "--lo", "1.3", "--hi", "1.6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let n1: f64 = text.lines().next().unwrap().trim_start_matches("N* = ").parse().unwrap();
    assert!((n1 - 1.42207).abs() < 5e-3, "{n1}");

    let out = run(&["merge", "--pair", "3", "--lo", "1.5", "--hi", "2.0"]);
    assert!(out.status.success());
    let n3: f64 = stdout(&out).lines().next().unwrap().trim_start_matches("N* = ").parse().unwrap();
    assert!(n3 > n1);

    let out = run(&["merge", "--pair", "1", "--lo", "1.9", "--hi", "2.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bracket"));
}

#[test]
fn classical_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let summary = |n: &str| -> serde_json::Value {
        let out = bin()
            .args(["classical", "--N", n, "--E", "1", "--format", "json", "--out"])
            .arg(dir.path().join(format!("c{n}.csv")))
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        serde_json::from_slice(&out.stdout).unwrap()
    };
    let s = summary("2");
    assert_eq!(s["outcome"], "closed-orbit");
    assert!((s["period"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-6);
    let s = summary("3");
    assert!((s["period"].as_f64().unwrap() - 2.4286).abs() < 1e-4);
    let s = summary("1.5");
    assert_eq!(s["outcome"], "escaped");
    assert!(s["escape_angle"].as_f64().unwrap() > 0.0);

    let traj = fs::read_to_string(dir.path().join("c3.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next(), Some("t,re_x,im_x,theta"));
    assert!(lines.count() > 100);
}

#[test]
fn classical_rejects_bad_start() {
    let out = run(&["classical", "--N", "2", "--E", "1", "--x0", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}
