use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use expdamp_core::diagnostics::read_ledger_csv;
use serde_json::{json, Value};
use tempfile::TempDir;

const HEADER: &str = "t,l2_sq,grad_sq,damp_diss,cum_grad,cum_damp,ledger_lhs,max_speed";

fn expdamp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expdamp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path
}

fn taylor_green(n: usize, cutoff: f64, t_end: f64) -> Value {
    json!({
        "n_per_dim": n,
        "cutoff": cutoff,
        "damping": {"alpha": 1.0, "beta": 1.0},
        "t_end": t_end,
        "dt_max": 1e-3,
        "diag_every": 10,
        "ic": {"kind": "taylor_green", "amplitude": 1.0}
    })
}

fn run(dir: &TempDir, config: &Value, out: &str) -> (Output, PathBuf) {
    let cfg = write_config(dir.path(), &format!("{out}.json"), config);
    let out = dir.path().join(out);
    let o = expdamp(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--threads", "1"]);
    (o, out)
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn zero_data_exits_cleanly_with_a_flat_ledger() {
    let dir = TempDir::new().unwrap();
    let mut cfg = taylor_green(8, 3.0, 0.05);
    cfg["ic"] = json!({"kind": "zero"});
    let (o, out) = run(&dir, &cfg, "zero");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_ledger_csv(fs::File::open(out.join("ledger.csv")).unwrap()).unwrap();
    assert!(rows.len() >= 2);
    assert!(rows.iter().all(|r| r.l2_sq == 0.0 && r.ledger_lhs == 0.0 && r.max_speed == 0.0));
    let m = manifest(&out);
    assert_eq!(m["verb"], "run");
    assert_eq!(m["exit_code"], 0);
    for f in m["outputs"].as_array().unwrap() {
        assert!(out.join(f.as_str().unwrap()).exists(), "{f}");
    }
}

#[test]
fn taylor_green_run_writes_every_artifact() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run(&dir, &taylor_green(16, 4.5, 1.0), "tg");
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("ledger.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(HEADER));
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["all_pass"], true);
    assert_eq!(summary["aborted"], Value::Null);
    let names: Vec<&str> = summary["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for want in ["ledger_inequality", "moment_bound_k1", "polybound_m2", "equicontinuity", "damping_l1", "pressure_hneg"] {
        assert!(names.iter().any(|n| n.starts_with(want)), "{want} missing from {names:?}");
    }
    let outputs = manifest(&out)["outputs"].clone();
    for f in ["ledger.csv", "summary.json", "final.ckpt"] {
        assert!(outputs.as_array().unwrap().iter().any(|o| o == f), "{f}");
    }
}

#[test]
fn invalid_configs_exit_with_code_two() {
    let dir = TempDir::new().unwrap();
    let mut unknown = taylor_green(8, 3.0, 0.1);
    unknown["viscosity"] = json!(1.0);
    let (o, _) = run(&dir, &unknown, "unknown");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("viscosity"));

    let (o, _) = run(&dir, &taylor_green(8, 7.5, 0.1), "cutoff");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cutoff"));

    let o = expdamp(&["run", "--out", dir.path().join("none").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_abort_exits_with_code_three_and_keeps_a_checkpoint() {
    let dir = TempDir::new().unwrap();
    let mut cfg = taylor_green(16, 4.5, 0.5);
    cfg["damping"]["beta"] = json!(40.0);
    let (o, out) = run(&dir, &cfg, "stiff");
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("final.ckpt").exists());
    assert!(out.join("ledger.csv").exists());
    let summary: Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["aborted"].is_string());
    assert_eq!(manifest(&out)["exit_code"], 3);
}

#[test]
fn identical_configs_give_identical_csv() {
    let dir = TempDir::new().unwrap();
    let mut cfg = taylor_green(16, 4.5, 0.1);
    cfg["ic"] = json!({"kind": "random_divfree", "spectrum_slope": -1.0, "energy": 10.0});
    cfg["seed"] = json!(11);
    let (a, out_a) = run(&dir, &cfg, "a");
    let (b, out_b) = run(&dir, &cfg, "b");
    assert_eq!(a.status.code(), b.status.code());
    let csv_a = fs::read(out_a.join("ledger.csv")).unwrap();
    assert_eq!(csv_a, fs::read(out_b.join("ledger.csv")).unwrap());
    cfg["seed"] = json!(12);
    let (_, out_c) = run(&dir, &cfg, "c");
    assert_ne!(csv_a, fs::read(out_c.join("ledger.csv")).unwrap());
}

#[test]
fn cutoff_study_of_identical_cutoffs_is_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", &taylor_green(16, 4.5, 0.05));
    let out = dir.path().join("ladder");
    let o = expdamp(&[
        "cutoff-study",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--cutoffs",
        "3.5,3.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let ladder: Value = serde_json::from_str(&fs::read_to_string(out.join("ladder.json")).unwrap()).unwrap();
    assert_eq!(ladder["rungs"][0]["l2_time"], 0.0);
    assert_eq!(ladder["rungs"][0]["hneg_sup"], 0.0);
    assert!(out.join("ledger_cutoff_3.5.csv").exists());
}

#[test]
fn verify_constants_reports_closed_forms() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("k");
    let o = expdamp(&["verify-constants", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("constants.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert!(v.is_object());
    assert_eq!(manifest(&out)["verb"], "verify-constants");
}
