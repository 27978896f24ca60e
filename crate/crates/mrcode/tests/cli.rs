//! End-to-end checks against the compiled binary: exit codes, JSON
//! shapes, and determinism of serialized output.

use std::path::PathBuf;
use std::process::{Command, Output};

fn mrcode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mrcode"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn fixture_path() -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("fixtures/example1.json");
    p.to_str().unwrap().to_string()
}

fn temp_file(name: &str) -> String {
    let mut p = std::env::temp_dir();
    p.push(format!("mrcode-test-{}-{name}", std::process::id()));
    p.to_str().unwrap().to_string()
}

const EXAMPLE_ARGS: &[&str] = &[
    "--p", "2", "--e", "2", "--r", "2", "--delta", "2", "--h", "2", "--m", "3",
];

#[test]
fn construct_emits_deterministic_code_json() {
    let mut args = vec!["construct"];
    args.extend_from_slice(EXAMPLE_ARGS);
    let first = mrcode(&args);
    assert!(first.status.success());
    let second = mrcode(&args);
    assert_eq!(first.stdout, second.stdout, "output must be byte-identical");

    let json: serde_json::Value = serde_json::from_str(&stdout(&first)).unwrap();
    assert_eq!(json["H"]["rows"], 5);
    assert_eq!(json["H"]["cols"], 9);
    assert_eq!(json["params"]["m"], 3);
    assert_eq!(json["repair_sets"][0], serde_json::json!([1, 2, 3]));
}

#[test]
fn verify_fixture_reports_108_patterns() {
    let path = fixture_path();
    let out = mrcode(&["verify", "--in", &path]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["total_patterns"], 108);
    assert_eq!(json["failures"], serde_json::json!([]));
}

#[test]
fn verify_from_params_all_methods() {
    for method in ["direct", "reduction", "definition"] {
        let mut args = vec!["verify"];
        args.extend_from_slice(EXAMPLE_ARGS);
        args.extend_from_slice(&["--method", method, "--jobs", "2"]);
        let out = mrcode(&args);
        assert_eq!(out.status.code(), Some(0), "method {method}");
        let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(json["method"], method);
        assert_eq!(json["failures"], serde_json::json!([]));
    }
}

#[test]
fn mindist_prints_both_values() {
    let mut args = vec!["mindist"];
    args.extend_from_slice(EXAMPLE_ARGS);
    let out = mrcode(&args);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("brute-force distance: 5"));
    assert!(text.contains("predicted distance:   5"));
}

#[test]
fn bound_evaluates_both_bounds() {
    let out = mrcode(&["bound", "--n", "9", "--k", "4", "--r", "2", "--delta", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("d <= 5"));

    let out = mrcode(&[
        "bound", "--n", "9", "--k", "4", "--r", "2", "--delta", "2", "--h", "2", "--m", "3",
        "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["distance_bound"], 5);
    assert_eq!(json["field_size_bound"]["case_id"], 1);
}

#[test]
fn encode_then_decode_round_trip() {
    let word_path = temp_file("word.json");
    let path = fixture_path();
    let out = mrcode(&[
        "encode", "--in", &path, "--message", "a^3,0,1,a", "--format", "pow", "--out", &word_path,
    ]);
    assert_eq!(out.status.code(), Some(0));

    let full: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&word_path).unwrap()).unwrap();
    let mut erased = full.clone();
    for i in [0, 3, 4, 6, 8] {
        erased["symbols"][i] = serde_json::Value::Null;
    }
    let erased_path = temp_file("erased.json");
    std::fs::write(&erased_path, serde_json::to_string(&erased).unwrap()).unwrap();

    let out = mrcode(&["decode", "--in", &path, "--word", &erased_path, "--format", "pow"]);
    assert_eq!(out.status.code(), Some(0));
    let decoded: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(decoded["symbols"], full["symbols"]);

    // six erasures exceed the parity budget: counterexample exit code
    let mut hopeless = full.clone();
    for i in 0..6 {
        hopeless["symbols"][i] = serde_json::Value::Null;
    }
    std::fs::write(&erased_path, serde_json::to_string(&hopeless).unwrap()).unwrap();
    let out = mrcode(&["decode", "--in", &path, "--word", &erased_path]);
    assert_eq!(out.status.code(), Some(1));

    let _ = std::fs::remove_file(word_path);
    let _ = std::fs::remove_file(erased_path);
}

#[test]
fn selftest_passes() {
    let out = mrcode(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("all patterns recoverable: ok"));
}

#[test]
fn usage_errors_exit_2() {
    let out = mrcode(&["construct", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mrcode(&["verify"]);
    assert_eq!(out.status.code(), Some(2));
    // delta below 2 is a parameter error
    let out = mrcode(&[
        "construct", "--p", "2", "--e", "2", "--r", "2", "--delta", "1", "--h", "2", "--m", "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_small_caps_passes() {
    let out = mrcode(&[
        "sweep", "--max-q", "4", "--max-r", "2", "--max-delta", "2", "--max-h", "2", "--max-m",
        "3", "--jobs", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("0 failures"));
    assert!(text.contains("yes"));
}
