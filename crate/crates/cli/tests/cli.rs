use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn clinr(dir: &Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_clinr"))
        .current_dir(dir)
        .env("CLINR_THREADS", "2")
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn run_over_files_writes_record_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"name": "s6", "variant": {"kind": "clinr", "plan": {"reference": "S6"}},
                  "noise": {"kind": "noiseless"}, "shots": 2000, "seed": 5}"#;
    std::fs::write(tmp.path().join("cfg.json"), cfg).unwrap();
    clinr(tmp.path(), &["--out", "a", "run", "--config", "cfg.json"]);
    let rec = json(&tmp.path().join("a/record.json"));
    assert_eq!(rec["acceptance_rate"], 1.0);
    assert_eq!(rec["counts"]["000"], 0);
    let man = json(&tmp.path().join("a/manifest.json"));
    assert_eq!(man["threads"], 2);
    assert_eq!(man["configs"][0]["fingerprint"], rec["fingerprint"]);
    assert_eq!(man["files"][0]["path"], "record.json");

    clinr(tmp.path(), &["--out", "b", "run", "--config", "cfg.json"]);
    let a = std::fs::read(tmp.path().join("a/record.json")).unwrap();
    let b = std::fs::read(tmp.path().join("b/record.json")).unwrap();
    let strip = |v: &[u8]| {
        let mut j: Value = serde_json::from_slice(v).unwrap();
        j["wall_seconds"] = Value::Null;
        j
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn sweep_report_is_reproducible_from_points() {
    let tmp = tempfile::tempdir().unwrap();
    clinr(
        tmp.path(),
        &["--out", "s", "sweep", "--kind", "schedules", "--shots", "5000", "--seed", "9"],
    );
    clinr(tmp.path(), &["--out", "r", "report", "--points", "s/points.json"]);
    let a = std::fs::read(tmp.path().join("s/report.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("r/report.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn resource_and_compile_graph() {
    let tmp = tempfile::tempdir().unwrap();
    clinr(tmp.path(), &["--out", "res", "resource"]);
    let info = json(&tmp.path().join("res/resource.json"));
    assert_eq!(info["nonidentity_stabilizers"], 4095);
    assert_eq!(info["unordered_pairs"], 8_382_465u64);
    clinr(tmp.path(), &["--out", "cg", "compile-graph", "--iters", "300", "--keep", "4"]);
    let s = json(&tmp.path().join("cg/summary.json"));
    let naive = s["naive"]["zz"].as_u64().unwrap();
    let best = s["costs"][0]["zz"].as_u64().unwrap();
    assert!(best <= naive);

    // a compilation file feeds the resource of a run
    let cfg = r#"{"variant": {"kind": "clinr", "resource": {"kind": "file", "path": "cg/compilations.json", "id": 1},
                  "plan": {"reference": "S2"}}, "noise": {"kind": "noiseless"}, "shots": 500}"#;
    std::fs::write(tmp.path().join("cfg.json"), cfg).unwrap();
    clinr(tmp.path(), &["--out", "r", "run", "--config", "cfg.json"]);
    assert_eq!(json(&tmp.path().join("r/record.json"))["acceptance_rate"], 1.0);
}

#[test]
fn synth_lower_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    clinr(tmp.path(), &["--out", "s", "synth"]);
    clinr(tmp.path(), &["--out", "l", "lower", "--input", "s/trotter.stim"]);
    let counts = json(&tmp.path().join("l/counts.json"));
    let summary = json(&tmp.path().join("s/summary.json"));
    assert_eq!(counts, summary["native"]);
}

#[test]
fn dataset_files_and_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let out = clinr(
        tmp.path(),
        &["--out", "d", "dataset", "--graphs", "2", "--pairs-per-graph", "3", "--shots", "200"],
    );
    assert!(out.starts_with("6 rows"));
    let csv = std::fs::read_to_string(tmp.path().join("d/dataset.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    let schema = json(&tmp.path().join("d/dataset.schema.json"));
    assert!(schema["columns"].as_array().unwrap().len() >= 8);
    let man = json(&tmp.path().join("d/manifest.json"));
    assert_eq!(man["files"].as_array().unwrap().len(), 3);
}

#[test]
fn bad_config_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("cfg.json"), r#"{"variant": {"kind": "direct"}, "shots": 0}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_clinr"))
        .current_dir(tmp.path())
        .args(["run", "--config", "cfg.json"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("shots"));
}
