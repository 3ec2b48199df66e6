//! End-to-end tests of the quatforget binary: exit codes, JSON schema,
//! and table determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quatforget"))
        .args(args)
        .output()
        .expect("spawn quatforget")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quatforget"))
        .args(args)
        .env(key, value)
        .output()
        .expect("spawn quatforget")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn datum_path(d: u64) -> String {
    format!("{}/data/datum_D{}.json", env!("CARGO_MANIFEST_DIR"), d)
}

#[test]
fn alg_split_and_definite() {
    let out = run(&["alg", "-a", "1", "-b", "1"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["D"], 1);
    assert_eq!(v["division"], false);

    let out = run(&["alg", "-a", "-1", "-b", "-1"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["D"], 2);
    assert_eq!(v["infinite_ramified"], true);
    assert_eq!(v["totally_indefinite"], false);
}

#[test]
fn alg_indefinite_division() {
    let out = run(&["alg", "-a", "-1", "-b", "3"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["D"], 6);
    assert_eq!(v["totally_indefinite"], true);
    assert_eq!(v["division"], true);
    assert_eq!(v["twisting_divisors"], serde_json::json!([2, 3]));
}

#[test]
fn usage_errors_exit_1() {
    // Missing -b.
    let out = run(&["alg", "-a", "1"]);
    assert_eq!(out.status.code(), Some(1));
    // Unknown subcommand.
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    // Unparseable rational.
    let out = run(&["alg", "-a", "x", "-b", "1"]);
    assert_eq!(out.status.code(), Some(1));
    // degree on a split algebra violates the precondition.
    let out = run(&["degree", "-a", "1", "-b", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn degree_schema_and_value() {
    let out = run(&["degree", "--disc", "6"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["D"], 6);
    assert_eq!(v["degree_piF"], 4);
    assert_eq!(v["twisting"], true);
    assert_eq!(v["complete"], true);
    // Exact schema field set.
    let obj = v.as_object().expect("object");
    let mut keys: Vec<&str> = obj.keys().map(|k| k.as_str()).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        vec![
            "D",
            "U0",
            "V0",
            "W0",
            "complete",
            "degree_piF",
            "omega_odd",
            "search_bound",
            "twisting",
            "twisting_divisors",
            "witnesses",
        ]
    );
}

#[test]
fn bound_exhaustion_exits_2() {
    let out = run_env(&["degree", "--disc", "94"], "QUATFORGET_BOUND", "2");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn embed_reports_dichotomy() {
    let out = run(&["embed", "--disc", "6", "-d", "2"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["embeddable"], true);
    assert!(v["witness"].is_array());

    let out = run(&["embed", "--disc", "6", "-d", "19"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["embeddable"], false);
    assert!(v["witness"].is_null());
}

#[test]
fn hilbert_degree_dichotomy() {
    let out = run(&["hilbert-degree", "--disc", "6", "-d", "2"]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!(v["degree"] == 1 || v["degree"] == 2);
    assert_eq!(v["degree"] == 2, v["contains_twist"] == true);

    // No embedding at all is a domain error.
    let out = run(&["hilbert-degree", "--disc", "6", "-d", "19"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn ns_report_and_errors() {
    let out = run(&["ns", "--datum", &datum_path(6)]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["D"], 6);
    assert_eq!(v["degree"], 1);
    assert_eq!(v["determinant_oracle"], 1);
    let plus = v["positive"].as_bool().unwrap();
    let minus = v["negative_positive"].as_bool().unwrap();
    assert!(plus ^ minus, "exactly one sign must be positive");

    // Malformed JSON is a parse error.
    let dir = std::env::temp_dir().join("quatforget-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = run(&["ns", "--datum", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    // Missing file is also a parse error.
    let out = run(&["ns", "--datum", "/nonexistent/datum.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn table_deterministic_and_bounded() {
    let first = run(&["table", "--dmax", "40"]);
    assert!(first.status.success());
    let second = run(&["table", "--dmax", "40"]);
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout, "table output must be byte-identical");

    let text = String::from_utf8(first.stdout).unwrap();
    let d6 = text
        .lines()
        .find(|l| l.starts_with("6\t"))
        .expect("row for D = 6");
    assert!(d6.contains("\t4\t"), "D = 6 row must show degree 4");
    for line in text.lines().skip(1) {
        assert!(
            line.ends_with("\ttrue") || line.ends_with("bound-exhausted"),
            "inconsistent row: {line}"
        );
    }

    let out = run(&["table", "--dmax", "20000"]);
    assert_eq!(out.status.code(), Some(1));
}
