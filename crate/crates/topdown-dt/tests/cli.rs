//! End-to-end checks of the command-line surface: verbs, file formats, exit
//! codes, and byte-identical reruns.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_topdown-dt"))
}

fn tmp(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("topdown-dt-test-{}-{name}", std::process::id()));
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn build_verb_reports_parity_tree() {
    let out = run(&["build", "--family", "parity:k=2", "--eps", "0"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["size"], 4);
    assert_eq!(v["termination"], "accuracy");
}

#[test]
fn oracle_verb_prints_size_and_depth() {
    let out = run(&["oracle", "--family", "parity:k=2"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "size 4\ndepth 2\n");
}

#[test]
fn truth_table_file_round_trips_through_cli() {
    let f = topdown_dt::boolfn::parity(3).unwrap();
    let path = tmp("par3.tt");
    let mut buf = Vec::new();
    topdown_dt::boolfn::write_truth_table(&mut buf, &f).unwrap();
    fs::write(&path, &buf).unwrap();
    let out = run(&["oracle", "--tt-file", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "size 8\ndepth 3\n");
    fs::remove_file(&path).ok();
}

#[test]
fn find_verb_fits_sample_file() {
    let f = topdown_dt::boolfn::parity(2).unwrap();
    let sample = topdown_dt::learn::full_support(&f);
    let path = tmp("par2.sample");
    let mut buf = Vec::new();
    topdown_dt::ehfind::write_sample(&mut buf, &sample).unwrap();
    fs::write(&path, &buf).unwrap();
    let out = run(&[
        "find",
        "--sample-file",
        path.to_str().unwrap(),
        "--size",
        "4",
        "--depth",
        "2",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["fit"], true);
    assert_eq!(v["size"], 4);
    assert_eq!(v["sample_error"], 0.0);
    fs::remove_file(&path).ok();
}

#[test]
fn learn_verb_emits_json_lines() {
    let out = run(&[
        "learn",
        "--family",
        "majority:k=3",
        "--mode",
        "monotone",
        "--trials",
        "3",
        "--size-bound",
        "8",
        "--steps",
        "16",
    ]);
    assert!(out.status.success());
    let lines: Vec<&str> = std::str::from_utf8(&out.stdout)
        .unwrap()
        .lines()
        .filter(|l| !l.is_empty())
        .collect();
    assert_eq!(lines.len(), 3);
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["true_error"].as_f64().unwrap() <= 0.1);
    }
}

#[test]
fn proper_learn_verb_reports() {
    let out = run(&[
        "proper-learn",
        "--family",
        "random-tree:n=8,s=8,seed=4",
        "--size-bound",
        "8",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["none_returned"], false);
    assert!(v["true_error"].as_f64().unwrap() <= 0.1);
}

#[test]
fn check_verb_exit_codes() {
    let ok = run(&[
        "check",
        "--tree-corpus",
        "15",
        "--monotone-corpus",
        "10",
        "--prefix-corpus",
        "5",
    ]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );

    // Fault injection must flip the exit code to 1.
    let bugged = run(&[
        "check",
        "--tree-corpus",
        "15",
        "--monotone-corpus",
        "5",
        "--prefix-corpus",
        "5",
        "--inject-bug",
    ]);
    assert_eq!(bugged.status.code(), Some(1));

    // Usage errors exit 2.
    let usage = run(&["check", "--no-such-flag"]);
    assert_eq!(usage.status.code(), Some(2));
    let bad_family = run(&["oracle", "--family", "nonsense:1"]);
    assert_eq!(bad_family.status.code(), Some(2));
}

#[test]
fn tables_are_byte_identical_across_runs() {
    let args = [
        "separation-approx",
        "--family",
        "nonmonotone",
        "--h",
        "1",
        "--format",
        "csv",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("# topdown-dt v"));

    let json = run(&["separation-exact", "--h-max", "1", "--format", "json"]);
    assert!(json.status.success());
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert!(v["rows"].as_array().unwrap().len() == 2);
}

#[test]
fn trace_out_writes_json_lines() {
    let trace = tmp("trace.jsonl");
    let out = run(&[
        "build",
        "--family",
        "exact-nonmonotone:h=1",
        "--eps",
        "0",
        "--trace-out",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let content = fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = content.lines().collect();
    assert_eq!(lines.len(), 7); // size 8 tree = 7 splits
    let first: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(first["step"], 0);
    // Initial cost is Inf(f_1) = 3/4 + 1/4 + 1/4 + 1/4 = 3/2.
    assert_eq!(first["cost_before"], serde_json::json!("3/2^1"));
    assert_eq!(first["score"], serde_json::json!("3/2^2"));
    fs::remove_file(&trace).ok();
}
