use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn uweil(args: &[&str], out: &Path) -> (Option<i32>, Value) {
    let status = Command::new(env!("CARGO_BIN_EXE_uweil"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    let json = std::fs::read_to_string(out).expect("report written");
    (status.status.code(), serde_json::from_str(&json).expect("report is JSON"))
}

#[test]
fn gauss_task_passes_at_rank_one() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = uweil(&["--q", "5", "--task", "gauss"], &dir.path().join("r.json"));
    assert_eq!(code, Some(0));
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["suites"][0]["name"], "gauss");
    assert_eq!(report["suites"][0]["status"], "pass");
}

#[test]
fn q_three_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = uweil(&["--q", "3"], &dir.path().join("r.json"));
    assert_eq!(code, Some(2));
    assert!(report["error"].as_str().unwrap().contains("q > 3"));
}

#[test]
fn fixed_seed_gives_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--q", "5", "--task", "compatibility", "--seed", "7"];
    let (_, a) = uweil(&args, &dir.path().join("a.json"));
    let (_, b) = uweil(&args, &dir.path().join("b.json"));
    let strip = |mut v: Value| {
        v["config"]["out"] = Value::Null;
        v
    };
    assert_eq!(strip(a), strip(b));
}

#[test]
fn certified_values_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = uweil(&["--q", "5", "--task", "compatibility"], &dir.path().join("r.json"));
    assert_eq!(code, Some(0));
    assert_eq!(report["certified"]["w_sign_variant"], "PLUS_A");
    assert_eq!(report["certified"]["kappa"], "-1");
}
