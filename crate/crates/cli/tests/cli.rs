use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("conicscan-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conicscan"))
        .args(args)
        .env_remove("CONICSCAN_THREADS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn report(dir: &PathBuf, file: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(file)).unwrap()).unwrap()
}

#[test]
fn scan_writes_a_report_with_config_echo() {
    let dir = scratch("scan");
    let out = run(&["scan", "--model", "builtin:qwz-3-1", "--grid", "9,12,12", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = report(&dir, "degeneracies.json");
    assert_eq!(doc["command"], "scan");
    assert_eq!(doc["config"]["scan"]["grid"], serde_json::json!([9, 12, 12]));
    assert_eq!(doc["result"]["count"], 1);
    assert_eq!(doc["result"]["conical"], 1);
    assert!(doc["conventions"]["chirality"].is_string());
}

#[test]
fn missing_model_file_exits_with_io_code() {
    let dir = scratch("missing");
    let out = run(&["scan", "--model", "/nonexistent/model.json", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn malformed_model_file_exits_with_io_code() {
    let dir = scratch("malformed");
    let path = dir.join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = run(&["scan", "--model", path.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["scan"])), 64);
    assert_eq!(code(&run(&["scan", "--model", "builtin:qwz-3-1", "--grid", "1,2"])), 64);
    assert_eq!(code(&run(&["scan", "--model", "builtin:qwz-3-1", "--band", "2"])), 64);
    assert_eq!(code(&run(&["--threads", "0", "models", "list"])), 64);
}

#[test]
fn non_conical_verification_is_a_precondition_failure() {
    let dir = scratch("tangent");
    let out = run(&["verify-theorem3", "--model", "builtin:qwz-tangent", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let doc = report(&dir, "chern_report.json");
    assert_eq!(doc["result"]["pass"], false);
    assert!(doc["result"]["non_conical"].is_array());
}

#[test]
fn verification_of_qwz_3_to_1_passes() {
    let dir = scratch("verify");
    let out = run(&["verify-theorem3", "--model", "builtin:qwz-3-1", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = report(&dir, "chern_report.json");
    assert_eq!(doc["result"]["pass"], true);
}

#[test]
fn perturbation_is_seed_deterministic() {
    let run_seed = |seed: &str, tag: &str| {
        let dir = scratch(tag);
        let out = run(&[
            "perturb",
            "--model",
            "builtin:qwz-tangent",
            "--kind",
            "pauli",
            "--seed",
            seed,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        report(&dir, "perturbation.json")["result"].clone()
    };
    let a = run_seed("5", "seed-a");
    let b = run_seed("5", "seed-b");
    let c = run_seed("6", "seed-c");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn thread_count_does_not_change_reports() {
    let go = |threads: &str, tag: &str| {
        let dir = scratch(tag);
        let out = run(&[
            "--threads",
            threads,
            "classify",
            "--model",
            "builtin:qwz-3-m3",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        std::fs::read_to_string(dir.join("cones.json")).unwrap()
    };
    assert_eq!(go("1", "t1"), go("3", "t3"));
}

#[test]
fn models_list_and_show() {
    let out = run(&["models", "list"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["qwz-3-1", "qwz-3-m3", "torus-weyl", "chart-weyl"] {
        assert!(text.contains(name), "{name} missing from list");
    }
    let shown = run(&["models", "show", "qwz-3-1"]);
    assert_eq!(code(&shown), 0);
    let v: Value = serde_json::from_slice(&shown.stdout).unwrap();
    assert!(v.is_object());
    assert_ne!(code(&run(&["models", "show", "no-such-model"])), 0);
}

#[test]
fn shown_model_roundtrips_through_a_file() {
    let dir = scratch("roundtrip");
    let shown = run(&["models", "show", "chart-weyl"]);
    let path = dir.join("weyl.json");
    std::fs::write(&path, &shown.stdout).unwrap();
    let out = run(&["classify", "--model", path.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = report(&dir, "cones.json");
    assert_eq!(doc["config"]["model_kind"], "chart");
}

#[test]
fn chern_slices_are_reported() {
    let dir = scratch("chern");
    let out = run(&["chern", "--model", "builtin:qwz-3-1", "--s", "0,1", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("chern.json")).unwrap();
    assert!(text.contains("\"value\": -1") || text.contains("\"c1\": -1"), "{text}");
}

#[test]
fn adiabatic_writes_flow_and_spectrum() {
    let dir = scratch("adiabatic");
    let out = run(&["adiabatic", "--model", "builtin:qwz-3-1", "--k1", "32", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc = report(&dir, "spectral_flow.json");
    assert!(doc["result"].to_string().contains("\"signed_count\":-1"), "{}", doc["result"]);
    assert!(dir.join("spectrum.csv").exists());
}
