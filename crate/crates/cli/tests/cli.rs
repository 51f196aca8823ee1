use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const RING: &str = r#"{
    "model": {"kind": "ring", "n": 5, "t": -1.0, "mu": -0.6},
    "reservoirs": [{"n_sites": 31, "t": -1.0, "g": 0.0, "attach": 4, "kappa": -0.5}],
    "phi_grid": {"start": 0.3, "stop": 2.9, "count": COUNT},
    "methods": ["nh_trace", "nh_operator", "lr", "rr", "iso", "exact"],
    "seed": 11
}"#;

fn nhpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nhpc")).args(args).env_remove("NHPC_WORKERS").output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.json");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn sweep(cfg: &str, out: &Path, workers: &str) -> Output {
    nhpc(&["sweep", "--config", cfg, "--output-dir", out.to_str().unwrap(), "--workers", workers])
}

#[test]
fn two_point_grid_gives_two_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &RING.replace("COUNT", "2"));
    let out = dir.path().join("out");
    let r = sweep(&cfg, &out, "1");
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = fs::read_to_string(out.join("currents.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "phi,nh_trace,nh_operator,lr_re,lr_im,rr,iso,exact");
    assert_eq!(lines.len(), 3);
    assert!(!csv.contains('\r'));
    for f in ["spectrum.csv", "eps.csv", "run_manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("run_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seed"], 11);
    assert!(manifest["ep_nudges"].is_array());
}

#[test]
fn output_is_bit_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &RING.replace("COUNT", "9"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(sweep(&cfg, &a, "1").status.success());
    assert!(sweep(&cfg, &b, "3").status.success());
    for f in ["currents.csv", "spectrum.csv", "eps.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn positive_kappa_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &RING.replace("COUNT", "3").replace("-0.5}", "0.5}"));
    let out = dir.path().join("out");
    let r = sweep(&cfg, &out, "1");
    assert_eq!(r.status.code(), Some(1));
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("reservoirs[0]") && err.contains("kappa"), "{err}");
    assert!(!out.join("currents.csv").exists());
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\n  \"model\": \n}");
    let r = nhpc(&["sweep", "--config", &cfg]);
    assert_eq!(r.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 3"));
}

#[test]
fn preset_list_names_every_preset() {
    let r = nhpc(&["preset-list"]);
    assert!(r.status.success());
    let text = String::from_utf8_lossy(&r.stdout);
    assert_eq!(text.lines().count(), 14);
    for name in ["fig1c", "fig2b", "fig4a", "figS4b"] {
        assert!(text.contains(name));
    }
}

#[test]
fn unknown_preset_is_rejected() {
    assert_eq!(nhpc(&["sweep", "--preset", "fig7"]).status.code(), Some(1));
}

#[test]
fn verify_reports_scaled_thresholds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &RING.replace("COUNT", "3"));
    let r = nhpc(&["verify", "--config", &cfg, "--points", "7", "--tol", "0.1"]);
    let text = String::from_utf8_lossy(&r.stdout);
    assert!(text.contains("conservation") && text.contains("threshold 1.000e-11"), "{text}");
    let failed = text.lines().filter(|l| l.starts_with("FAIL")).count();
    assert_eq!(r.status.code(), Some(if failed == 0 { 0 } else { 3 }));
    let r = nhpc(&["verify", "--config", &cfg, "--points", "7", "--tol", "1e-30"]);
    assert_eq!(r.status.code(), Some(3));
}
