//! End-to-end runs of the binary against the bundled instance files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn instance(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("instances")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reldoc"))
        .args(args)
        .env_remove("RELDOC_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

#[test]
fn boolean_core_laws_pass() {
    let file = instance("boolean_core.json");
    let out = run(&[
        "check-laws",
        "--in",
        file.to_str().unwrap(),
        "--cartesian",
        "--frobenius",
        "--modular",
        "--ruc",
    ]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "stdout: {text}");
    assert!(text.contains("doctrine bool_rel"), "stdout: {text}");
    assert!(text.contains("result: ok"), "stdout: {text}");
    assert!(!text.contains("fail"), "stdout: {text}");
}

#[test]
fn modular_counterexample_fails_with_witness() {
    let file = instance("not_modular_h.json");
    let out = run(&["check-laws", "--in", file.to_str().unwrap(), "--modular"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(1), "stdout: {text}");
    assert!(text.contains("modular-law"), "stdout: {text}");
    assert!(text.contains("alpha=01"), "stdout: {text}");
}

#[test]
fn laws_alias_matches_check_laws() {
    let file = instance("not_modular_h.json");
    let a = run(&["check-laws", "--in", file.to_str().unwrap(), "--modular"]);
    let b = run(&["laws", "--in", file.to_str().unwrap(), "--modular"]);
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn ruc_powerset_counterexample() {
    let file = instance("ruc_powerset.json");
    let out = run(&[
        "ruc",
        "--in",
        file.to_str().unwrap(),
        "--doctrine",
        "pow_rel",
        "--x",
        "One",
        "--y",
        "A",
    ]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(1), "stdout: {text}");
    assert!(text.contains("holds: false"), "stdout: {text}");
    assert!(text.contains("witness"), "stdout: {text}");
}

#[test]
fn quotient_flags_for_finite_distance_merge() {
    let file = instance("lawvere_spaces.json");
    let out = run(&[
        "quotient",
        "--in",
        file.to_str().unwrap(),
        "--space",
        "pairs",
        "--json",
    ]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "stdout: {text}");
    let v: serde_json::Value = serde_json::from_str(&text).expect("json output");
    assert_eq!(v["classes"], serde_json::json!(["[a]", "[c]"]));
    assert_eq!(v["closure_added"], serde_json::json!(false));
    assert_eq!(v["quotient"], serde_json::json!(true));
    assert_eq!(v["effective"], serde_json::json!(false));
    assert_eq!(v["descent"], serde_json::json!(true));
}

#[test]
fn separate_collapses_zero_distance_pair() {
    let file = instance("lawvere_spaces.json");
    let out = run(&[
        "separate",
        "--in",
        file.to_str().unwrap(),
        "--space",
        "huddle",
        "--json",
    ]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "stdout: {text}");
    let v: serde_json::Value = serde_json::from_str(&text).expect("json output");
    assert_eq!(v["was_separated"], serde_json::json!(false));
    assert_eq!(v["separated"], serde_json::json!(true));
    assert_eq!(v["carrier"].as_array().unwrap().len(), 2);
    assert_eq!(v["projection"]["table"][0], v["projection"]["table"][1]);
}

#[test]
fn factorize_certifies_both_legs() {
    let file = instance("lawvere_spaces.json");
    let out = run(&[
        "factorize",
        "--in",
        file.to_str().unwrap(),
        "--map",
        "fold",
        "--json",
    ]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "stdout: {text}");
    let v: serde_json::Value = serde_json::from_str(&text).expect("json output");
    assert_eq!(v["surjection"], serde_json::json!(true));
    assert_eq!(v["injection"], serde_json::json!(true));
    assert_eq!(v["composite"], serde_json::json!(true));
    assert_eq!(v["classes"].as_array().unwrap().len(), 2);
}

#[test]
fn bisim_relates_states_with_equal_behaviour() {
    let file = instance("bisim.json");
    let out = run(&[
        "bisim",
        "--in",
        file.to_str().unwrap(),
        "--left",
        "left",
        "--right",
        "right",
        "--json",
    ]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "stdout: {text}");
    let v: serde_json::Value = serde_json::from_str(&text).expect("json output");
    assert_eq!(v["tag"], serde_json::json!("exact"));
    assert_eq!(v["converged"], serde_json::json!(true));
    assert_eq!(
        v["related"],
        serde_json::json!([["s0", "t0"], ["s1", "t1"], ["s2", "t0"]])
    );
}

#[test]
fn algebras_check_passes() {
    let file = instance("boolean_core.json");
    let out = run(&["algebras", "check", "--in", file.to_str().unwrap()]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "stdout: {text}");
    assert!(text.contains("algebra two"), "stdout: {text}");
}

#[test]
fn report_is_deterministic() {
    let file = instance("lawvere_spaces.json");
    let a = run(&["report", "--in", file.to_str().unwrap(), "--json"]);
    let b = run(&["report", "--in", file.to_str().unwrap(), "--json"]);
    assert_eq!(a.status.code(), Some(0), "stdout: {}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, run(&["report", "--in", file.to_str().unwrap(), "--json"]).stdout);
}

#[test]
fn report_counterexample_file_exits_one() {
    let file = instance("not_modular_h.json");
    let out = run(&["report", "--in", file.to_str().unwrap()]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(1), "stdout: {text}");
    assert!(text.contains("modular-law"), "stdout: {text}");
    assert!(text.contains("skipped"), "stdout: {text}");
}

#[test]
fn report_full_boolean_file_passes() {
    let file = instance("boolean_core.json");
    let out = run(&["report", "--in", file.to_str().unwrap()]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "stdout: {text}");
    assert!(text.contains("algebra two"), "stdout: {text}");
    assert!(text.contains("result: ok"), "stdout: {text}");
}

#[test]
fn empty_instance_reports_nothing_and_passes() {
    let dir = std::env::temp_dir().join("reldoc-cli-empty");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("empty.json");
    std::fs::write(&file, "{}\n").unwrap();
    let out = run(&["report", "--in", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stdout: {}", stdout(&out));
}

#[test]
fn malformed_instance_exits_two() {
    let dir = std::env::temp_dir().join("reldoc-cli-bad");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("bad.json");
    std::fs::write(&file, "{ \"sets\": { \"X\": [\"a\", \"a\"] } }").unwrap();
    let out = run(&["report", "--in", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("error"), "stderr: {err}");

    let file2 = dir.join("bad2.json");
    std::fs::write(&file2, "not json").unwrap();
    let out2 = run(&["report", "--in", file2.to_str().unwrap()]);
    assert_eq!(out2.status.code(), Some(2));
}

#[test]
fn unknown_option_exits_two() {
    let out = run(&["report", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn env_seed_overrides_flag() {
    let file = instance("boolean_core.json");
    let out = Command::new(env!("CARGO_BIN_EXE_reldoc"))
        .args(["check-laws", "--in", file.to_str().unwrap(), "--seed", "5", "--json"])
        .env("RELDOC_SEED", "99")
        .output()
        .expect("binary runs");
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json output");
    assert_eq!(v["seed"], serde_json::json!(99));

    let bad = Command::new(env!("CARGO_BIN_EXE_reldoc"))
        .args(["check-laws", "--in", file.to_str().unwrap()])
        .env("RELDOC_SEED", "not-a-number")
        .output()
        .expect("binary runs");
    assert_eq!(bad.status.code(), Some(2));
}
