use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const DISCRETE: &str = r#"{
  "points": ["a", "b", "c"],
  "matrix": [["0", "1", "1"], ["1", "0", "1"], ["1", "1", "0"]],
  "sequences": [{"pre": ["a"], "cycle": ["b"]}],
  "subsets": [["a"], ["a", "b"]],
  "formal_balls": [{"point": "a", "radius": "-1/2"}, {"point": "b", "radius": "0"}]
}"#;

fn yoneda(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_yoneda")).args(args).current_dir(dir).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn workdir() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("discrete.json"), DISCRETE).unwrap();
    dir
}

#[test]
fn check_discrete_metric() {
    let dir = workdir();
    let out = yoneda(&["check", "discrete.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["validation"]["is_metric"], true);
    assert_eq!(r["completeness"]["complete"], true);
    assert_eq!(r["sequences"][0]["limits"]["double_hole"], serde_json::json!(["b"]));
    assert_eq!(r["subsets"][1]["d_directed"], false);
    assert_eq!(r["formal_balls"]["distances"][0][1], "1/2");
}

#[test]
fn exit_codes_separate_parse_and_precondition_errors() {
    let dir = workdir();
    std::fs::write(dir.path().join("broken.json"), "{\"points\": [").unwrap();
    std::fs::write(
        dir.path().join("triangle.json"),
        r#"{"points": ["a", "b", "c"], "matrix": [["0", "1", "5"], ["1", "0", "1"], ["5", "1", "0"]]}"#,
    )
    .unwrap();
    std::fs::write(dir.path().join("pair.json"), r#"{"points": ["p", "q"], "matrix": [["0", "1"], ["1", "0"]]}"#)
        .unwrap();
    assert_eq!(yoneda(&["check", "broken.json"], dir.path()).status.code(), Some(2));
    assert_eq!(yoneda(&["check", "missing.json"], dir.path()).status.code(), Some(2));
    assert_eq!(yoneda(&["check", "triangle.json"], dir.path()).status.code(), Some(3));
    assert_eq!(yoneda(&["audit", "discrete.json", "--theorems", "nope"], dir.path()).status.code(), Some(2));
    let mismatch = yoneda(&["audit", "discrete.json", "--second-distance", "pair.json"], dir.path());
    assert_eq!(mismatch.status.code(), Some(3));
    assert_eq!(yoneda(&["gallery", "unknown"], dir.path()).status.code(), Some(2));
    assert_eq!(yoneda(&["gallery", "fm", "--cutoff", "3"], dir.path()).status.code(), Some(3));
}

#[test]
fn audit_selected_statements() {
    let dir = workdir();
    let out = yoneda(&["audit", "discrete.json", "--theorems", "cor_yc_1,thm_ded"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["input"]["second_distance"], "join");
    let entries = r["result"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["statement"], "cor_yc_1");
    assert_eq!(entries[0]["conclusion"], "verified");
}

#[test]
fn gallery_halfopen_reports_the_gap() {
    let dir = workdir();
    let out = yoneda(&["gallery", "halfopen", "--cutoff", "100", "--json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["summary"]["leq_sup"], "2");
    assert_eq!(r["summary"]["d_sup"], "none");
    assert_eq!(r["all_hold"], true);
}

#[test]
fn gallery_markdown() {
    let dir = workdir();
    let out = yoneda(&["--format", "markdown", "gallery", "fm", "--cutoff", "50"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# gallery"));
    assert!(text.contains("counterexample replicated"));
}

#[test]
fn family_files_are_checked_on_their_truncation() {
    let dir = workdir();
    std::fs::write(
        dir.path().join("family.json"),
        r#"{"rule": "truncated-difference", "cutoff": 8, "params": {"carrier": "reciprocal-chain", "extras": {"2": "2"}}}"#,
    )
    .unwrap();
    let out = yoneda(&["check", "family.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["points"].as_array().unwrap().len(), 10);
    assert_eq!(r["validation"]["is_hemimetric"], true);
}

#[test]
fn random_runs_are_byte_identical() {
    let dir = workdir();
    let args = ["random", "--n", "6", "--count", "300", "--seed", "7"];
    let a = yoneda(&args, dir.path());
    let b = yoneda(&args, dir.path());
    let c = Command::new(env!("CARGO_BIN_EXE_yoneda"))
        .args(args)
        .env("QML_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    let r = json(&a);
    assert_eq!(r["result"]["failures"].as_array().unwrap().len(), 0);
    assert_eq!(r["result"]["report_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn report_merges_prior_outputs() {
    let dir = workdir();
    yoneda(&["check", "discrete.json", "-o", "check.json"], dir.path());
    yoneda(&["random", "--count", "20", "-o", "random.json"], dir.path());
    let out = yoneda(&["--format", "markdown", "report", "check.json", "random.json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# Report"));
    assert!(text.contains("## check") && text.contains("## random"));
    assert!(text.contains("| thm_cds |"));
    let bad = yoneda(&["report", "discrete.json"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}
