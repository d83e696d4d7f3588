use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_betashadow")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1, "error object is one line: {text}");
    serde_json::from_str(&text).expect("stderr is JSON")
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn validate_reports_the_gap() {
    let out = run(&["validate", "--beta", "2", "--alpha", "0", "--orbit", "0.3,0.72", "--delta", "0.1"]);
    assert_eq!(code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["max_gap"], "0.12");
    assert_eq!(v["valid"], false);

    let out = run(&["validate", "--beta", "2", "--alpha", "0", "--orbit", "0.3,0.62", "--delta", "0.1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["valid"], true);
}

#[test]
fn expand_prints_digits() {
    let out = run(&["expand", "--beta", "2", "--alpha", "0", "--x", "0.625", "--n", "5"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["digits"], "10100");
    assert_eq!(v["value"], "0.625");
}

#[test]
fn sweep_rejects_a_single_cell_grid() {
    let out = run(&["sweep", "--beta-min", "1.95", "--beta-max", "2", "--grid", "1"]);
    assert_eq!(code(&out), 2);
    assert_eq!(stderr_json(&out)["error"], "InvalidParams");
}

#[test]
fn sweep_near_two_is_all_transitive() {
    let out = run(&["sweep", "--beta-min", "1.95", "--beta-max", "2", "--grid", "10"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("beta,alpha,transitive,n,J_lo,J_hi,alpha_hat,residual,error"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r.split(',').nth(2) == Some("true")));

    let out = run(&["sweep", "--beta-min", "1.2", "--beta-max", "1.2", "--grid", "3", "--format", "json"]);
    let rows = stdout_json(&out);
    assert_eq!(rows.as_array().unwrap().len(), 9);
    assert_eq!(rows[4]["transitive"], "false");
    assert_eq!(rows[4]["n"], "2");
}

#[test]
fn witness_is_not_shadowed_and_feeds_back_into_shadow_check() {
    let out = run(&["witness", "--beta", "1.5", "--alpha", "0.25", "--epsilon", "0.05"]);
    assert_eq!(code(&out), 0);
    let trace = stdout_json(&out);
    assert_eq!(trace["status"], "NotShadowed");
    assert_eq!(trace["case"], "Case2");

    let path = scratch("witness.json");
    std::fs::write(&path, serde_json::to_string(&trace).unwrap()).unwrap();
    let file = path.to_str().unwrap();
    let args = ["--beta", "1.5", "--alpha", "0.25", "--input", file];
    let out = run(&[&["validate"][..], &args].concat());
    assert_eq!(code(&out), 0);
    let out = run(&[&["shadow-check"][..], &args, &["--epsilon", "0.05", "--samples", "200"]].concat());
    assert_eq!(code(&out), 1);
    let report = stdout_json(&out);
    assert_eq!(report["status"], "NotShadowed");
    assert_eq!(report["grid_witness"], Value::Null);
}

#[test]
fn witness_with_explicit_delta_on_a_map_file() {
    let path = scratch("lorenz.json");
    let map = r#"{"breakpoints":["0.5"],"branches":[{"slope":"1.6","intercept":"0.1"},{"slope":"1.6","intercept":"-0.7"}],"sides":["right"]}"#;
    std::fs::write(&path, map).unwrap();
    let file = path.to_str().unwrap();

    let out = run(&["witness", "--map", file, "--epsilon", "0.05", "--delta", "0.01"]);
    assert_eq!(code(&out), 0);
    let trace = stdout_json(&out);
    assert_eq!(trace["case"], "Case1");
    let points = trace["pseudo"]["points"].as_array().unwrap();
    assert_eq!(points[points.len() - 2], "0.495");

    // the Lorenz map misses [0, 0.1), so the automatic route refuses it
    let out = run(&["witness", "--map", file, "--epsilon", "0.05"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stderr_json(&out)["error"], "NotTransitive");
}

#[test]
fn doubling_map_yields_no_witness() {
    let out = run(&["witness", "--beta", "2", "--alpha", "0", "--epsilon", "0.1"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stderr_json(&out)["error"], "NoWitness");
}

#[test]
fn shadow_check_accepts_a_true_orbit() {
    let out = run(&["iterate", "--beta", "1.5", "--alpha", "0.25", "--x", "0.3", "--n", "6"]);
    let points: Vec<String> =
        stdout_json(&out)["points"].as_array().unwrap().iter().map(|p| p.as_str().unwrap().to_string()).collect();
    let orbit = points.join(",");
    let out = run(&[
        "shadow-check", "--beta", "1.5", "--alpha", "0.25", "--orbit", &orbit, "--delta", "0.01", "--epsilon", "0.01",
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["status"], "Shadowed");
}

#[test]
fn renormalize_exit_codes() {
    let out = run(&["renormalize", "--beta", "1.2", "--alpha", "0.4"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["n"], 2);
    assert_eq!(v["beta_n"], "1.44");

    let out = run(&["renormalize", "--beta", "1.9", "--alpha", "0.05"]);
    assert_eq!(code(&out), 1);
    assert_eq!(stderr_json(&out)["error"], "IsTransitive");
}

#[test]
fn invalid_input_exits_with_two() {
    for args in [
        &["expand", "--beta", "2", "--alpha", "0", "--x", "0.625", "--n", "5", "--bogus"][..],
        &["expand", "--beta", "2.5", "--alpha", "0", "--x", "0.5", "--n", "5"],
        &["expand", "--beta", "2", "--alpha", "0", "--x", "abc", "--n", "5"],
        &["iterate", "--beta", "2", "--alpha", "0", "--x", "1.5", "--n", "2"],
        &["validate", "--beta", "2", "--alpha", "0", "--orbit", "0.3", "--delta", "0.1"],
        &["validate", "--beta", "2", "--alpha", "0", "--orbit", "0.3,0.6", "--delta", "0.1", "--format", "csv"],
        &["witness", "--beta", "2", "--alpha", "0", "--epsilon", "0.4"],
        &["map-info"],
        &["frobnicate"],
    ] {
        let out = run(args);
        assert_eq!(code(&out), 2, "{args:?}");
        assert!(stderr_json(&out)["error"].is_string());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn piece_cap_exits_with_three() {
    let out = run(&[
        "shadow-check", "--beta", "2", "--alpha", "0", "--orbit", "0.5,0.5,0.5,0.5,0.5,0.5,0.5,0.5", "--delta", "1",
        "--epsilon", "0.9", "--max-pieces", "8",
    ]);
    assert_eq!(code(&out), 3);
    assert_eq!(stderr_json(&out)["error"], "PieceExplosion");
}

#[test]
fn output_is_deterministic_and_round_trips() {
    let args = ["witness", "--beta", "1.2", "--alpha", "0.4", "--epsilon", "0.01"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    let v = stdout_json(&first);
    assert_eq!(v["case"], "TheoremB");
    let reparsed: Value = serde_json::from_str(&v.to_string()).unwrap();
    assert_eq!(reparsed, v);
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let path = scratch("info.json");
    let _ = std::fs::remove_file(&path);
    let out = run(&["map-info", "--beta", "1.5", "--alpha", "0.25", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["transitive"], "true");
    assert_eq!(v["breakpoints"][0], "0.5");
}

#[test]
fn float_mode_agrees_on_the_gap() {
    let out = run(&["validate", "--float", "--beta", "2", "--alpha", "0", "--orbit", "0.3,0.72", "--delta", "0.1"]);
    assert_eq!(code(&out), 1);
    let gap: f64 = stdout_json(&out)["max_gap"].as_str().unwrap().parse().unwrap();
    assert!((gap - 0.12).abs() < 1e-12);
}
