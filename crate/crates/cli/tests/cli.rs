use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use boxlab_cli::report::RunReport;

fn suites() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("suites")
}

fn boxlab(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_boxlab"));
    cmd.args(args).env_remove("BOXLAB_THREADS");
    if let Some(t) = threads {
        cmd.env("BOXLAB_THREADS", t);
    }
    cmd.output().expect("boxlab runs")
}

fn suite(name: &str, threads: Option<&str>) -> Output {
    let path = suites().join(name);
    boxlab(&["suite", path.to_str().unwrap()], threads)
}

#[test]
fn suite_exit_codes() {
    assert_eq!(suite("default.json", None).status.code(), Some(0));
    assert_eq!(suite("violation.json", None).status.code(), Some(1));
    assert_eq!(suite("sampled.json", None).status.code(), Some(2));
}

#[test]
fn violation_names_the_subset() {
    let out = suite("violation.json", None);
    let report = RunReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    let c1 = &report.checks[0].detail["c1"];
    assert_eq!(c1["holds"], "false");
    assert_eq!(c1["worst_witness"]["subset"], serde_json::json!([[1, 2]]));
}

#[test]
fn reports_round_trip() {
    let out = suite("default.json", None);
    let text = std::str::from_utf8(&out.stdout).unwrap();
    let report = RunReport::from_json(text).unwrap();
    assert_eq!(report.to_json(), text);
}

#[test]
fn reports_do_not_depend_on_threads() {
    for name in ["default.json", "violation.json", "sampled.json"] {
        let a = suite(name, Some("1")).stdout;
        let b = suite(name, Some("8")).stdout;
        let c = suite(name, Some("8")).stdout;
        assert_eq!(a, b, "{name}");
        assert_eq!(b, c, "{name}");
    }
}

#[test]
fn parse_errors_carry_positions() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"spaces\": [[0.5, 0.5]],\n  \"edges\": [[0]\n}\n").unwrap();
    let out = boxlab(&["norm", "--instance", bad.to_str().unwrap(), "--ell", "2"], None);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(&format!("{}:4:1", bad.display())), "{err}");
}

#[test]
fn invalid_instances_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"spaces": [[0.5, 0.7]], "edges": [[0]], "functions": []}"#).unwrap();
    let out = boxlab(&["norm", "--instance", bad.to_str().unwrap(), "--ell", "2"], None);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn generated_instances_load() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("inst.json");
    let f = file.to_str().unwrap();
    let out = boxlab(
        &[
            "gen",
            "--n",
            "3",
            "--r",
            "2",
            "--atoms",
            "2,3,2",
            "--kind",
            "product-weights",
            "--seed",
            "4",
            "--out",
            f,
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let out = boxlab(
        &["norm", "--instance", f, "--edge", "1", "--ell", "4", "--p", "inf"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let report = RunReport::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(report.checks.len(), 1);
    assert_eq!(report.checks[0].name, "lp_box_norm[0, 2]");
    let out = boxlab(&["cutnorm", "--instance", f, "--edge", "0,1"], None);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(boxlab(&["--help"], None).status.code(), Some(0));
    assert_eq!(boxlab(&["norm", "--bogus"], None).status.code(), Some(3));
    assert_eq!(suite("default.json", Some("zero")).status.code(), Some(3));
}
