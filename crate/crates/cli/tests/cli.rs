use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fuzzymon"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = run(dir, args);
    assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

/// simulate, split, train, evidence, odd derive/check and benchmark.
fn pipeline(dir: &Path) {
    ok(dir, &["simulate", "--episodes", "600", "--seed", "9", "--out", "all.jsonl", "--schema-out", "schema.json"]);
    ok(dir, &["split", "--data", "all.jsonl", "--seed", "1", "--train-out", "train.jsonl", "--val-out", "val.jsonl"]);
    ok(dir, &["train", "--schema", "schema.json", "--data", "train.jsonl", "--model", "model.json", "--log-every", "0"]);
    ok(dir, &["evidence", "--model", "model.json", "--out", "evidence.json"]);
    ok(dir, &["odd", "derive", "--model", "model.json", "--out", "spec.odd"]);
    ok(dir, &[
        "odd", "check", "--odd", "spec.odd", "--schema", "schema.json", "--data", "val.jsonl", "--out", "within.jsonl",
        "--summary", "summary.json",
    ]);
    ok(dir, &[
        "benchmark", "--model", "model.json", "--train", "train.jsonl", "--data", "val.jsonl", "--odd", "spec.odd",
        "--seed", "3", "--out", "bench.json",
    ]);
}

const OUTPUTS: [&str; 7] = ["all.jsonl", "model.json", "evidence.json", "spec.odd", "summary.json", "within.jsonl", "bench.json"];

#[test]
fn pipeline_outputs_are_byte_identical_across_runs() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    pipeline(a.path());
    pipeline(b.path());
    for f in OUTPUTS {
        let x = fs::read(a.path().join(f)).unwrap();
        assert!(!x.is_empty(), "{f} is empty");
        assert_eq!(x, fs::read(b.path().join(f)).unwrap(), "{f} differs");
    }

    let bench: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("bench.json")).unwrap()).unwrap();
    assert_eq!(bench["rows"].as_array().unwrap().len(), 8);
    assert_eq!(bench["odd_filtered"], true);
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(a.path().join("summary.json")).unwrap()).unwrap();
    let kept = fs::read_to_string(a.path().join("within.jsonl")).unwrap().lines().count() as u64;
    assert_eq!(summary["retained"].as_u64(), Some(kept));
    assert_eq!(bench["evaluated"].as_u64(), Some(kept));

    let spec = fs::read_to_string(a.path().join("spec.odd")).unwrap();
    assert!(spec.starts_with("Include weather is ["));
    assert!(spec.contains("Conditional Exclude"));
}

#[test]
fn text_formats_render_tables() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    pipeline(d);
    ok(d, &["evidence", "--model", "model.json", "--out", "evidence.txt", "--format", "text"]);
    let text = fs::read_to_string(d.join("evidence.txt")).unwrap();
    assert!(text.contains("gamma_A = gamma_cr * gamma_B * gamma_SCA"));
    ok(d, &[
        "benchmark", "--model", "model.json", "--train", "train.jsonl", "--data", "val.jsonl", "--out", "bench.txt",
        "--format", "text",
    ]);
    let text = fs::read_to_string(d.join("bench.txt")).unwrap();
    assert!(text.contains("tau_mP") && text.contains("tau_HmP"));
}

#[test]
fn resume_continues_training() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    pipeline(d);
    let before: serde_json::Value = serde_json::from_slice(&fs::read(d.join("model.json")).unwrap()).unwrap();
    ok(d, &["train", "--data", "val.jsonl", "--model", "model.json", "--resume", "--log-every", "0"]);
    let after: serde_json::Value = serde_json::from_slice(&fs::read(d.join("model.json")).unwrap()).unwrap();
    let seen = |v: &serde_json::Value| v["model"]["global"]["n_seen"].as_u64().unwrap();
    let val = fs::read_to_string(d.join("val.jsonl")).unwrap().lines().count() as u64;
    assert_eq!(seen(&after), seen(&before) + val);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(code(&run(d, &["bogus"])), 1);
    assert_eq!(code(&run(d, &["split", "--data", "x"])), 1);
    assert_eq!(code(&run(d, &["--help"])), 0);
    assert_eq!(code(&run(d, &["train", "--schema", "nope.json", "--data", "x.jsonl", "--model", "m.json"])), 2);

    ok(d, &["simulate", "--episodes", "5", "--seed", "2", "--out", "tiny.jsonl", "--schema-out", "schema.json"]);
    ok(d, &["split", "--data", "tiny.jsonl", "--fraction", "0.5", "--train-out", "t.jsonl", "--val-out", "v.jsonl"]);
    // five episodes cannot fill a 500-sample window
    let args = ["train", "--schema", "schema.json", "--data", "tiny.jsonl", "--model", "m.json", "--log-every", "0"];
    assert_eq!(code(&run(d, &args)), 3);
    let mut lenient = args.to_vec();
    lenient.push("--allow-low-accuracy");
    ok(d, &lenient);

    fs::write(d.join("bad.odd"), "Include weather is [clear]\nExcldue scene is [highway]\n").unwrap();
    let out = run(d, &["odd", "check", "--odd", "bad.odd", "--schema", "schema.json", "--data", "v.jsonl", "--out", "o.jsonl"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Excldue"));

    fs::write(d.join("broken.jsonl"), "{\"weather\": \n").unwrap();
    let out = run(d, &["train", "--schema", "schema.json", "--data", "broken.jsonl", "--model", "b.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn strict_bound_is_an_acceptance_failure() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    pipeline(d);
    let out = run(d, &["evidence", "--model", "model.json", "--out", "strict.json", "--gamma-c", "1e-9"]);
    assert_eq!(code(&out), 3);
    let report: serde_json::Value = serde_json::from_slice(&fs::read(d.join("strict.json")).unwrap()).unwrap();
    assert_eq!(report["verdict"], "unacceptable");
}
