use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn opcalc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opcalc"))
        .args(args)
        .current_dir(dir)
        .env_remove("OPCALC_THREADS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn run_ok(dir: &Path, args: &[&str]) {
    let out = opcalc(args, dir);
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

fn scalar_config(boundary: &str) -> Value {
    json!({
        "operator_a": {"kind": "custom", "dim": 2, "grid_step": 1.0, "parameters": {"value": -1.0}},
        "operator_h": {"kind": "custom", "dim": 2, "grid_step": 1.0, "parameters": {"value": 0.0}},
        "boundary": boundary,
        "point": {"lambda": [0.0, 0.0], "mu": [0.0, 0.0]},
        "data": {"u1": {"kind": "constant", "value": [1.0, 0.0]}},
        "nx": 129
    })
}

fn wentzell_scan() -> Value {
    let grid = json!({
        "lambda_moduli": [4.0, 40.0, 400.0, 4000.0, 40000.0],
        "lambda_args": [0.0, 1.5707963267948966, -1.5707963267948966],
        "mu_moduli": [1.0, 10.0, 100.0, 1000.0],
        "mu_args": [0.0],
        "mu_scale": "edge",
        "filter": {"kind": "omega", "r": 4.0}
    });
    json!({
        "command": "scan",
        "operator_a": {"kind": "laplacian1d", "dim": 16, "grid_step": 1.0 / 17.0},
        "operator_h": {"kind": "wentzell", "dim": 16, "grid_step": 1.0 / 17.0},
        "grid": grid,
        "scan": {"kind": "sharp", "case": "first"},
        "seed": 9
    })
}

#[test]
fn solve_zero_data_writes_zero_profile() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = scalar_config("robin");
    cfg["data"] = json!({});
    let path = write_config(tmp.path(), "zero.json", &cfg);
    run_ok(tmp.path(), &["solve", path.to_str().unwrap(), "--output-dir", "out"]);
    let csv = fs::read_to_string(tmp.path().join("out/solution.csv")).unwrap();
    assert!(csv.starts_with("# opcalc "));
    assert!(csv.contains("# config_sha256="));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 129);
    assert!(rows.iter().all(|r| r[1..].iter().all(|v| *v == 0.0)));
    let summary: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/summary.json")).unwrap()).unwrap();
    assert!(summary["meta"][1].as_str().unwrap().starts_with("config_sha256="));
}

#[test]
fn solve_scalar_closed_forms() {
    let tmp = TempDir::new().unwrap();
    let robin = write_config(tmp.path(), "robin.json", &scalar_config("robin"));
    run_ok(tmp.path(), &["solve", robin.to_str().unwrap(), "--output-dir", "r"]);
    let rows = data_rows(&fs::read_to_string(tmp.path().join("r/solution.csv")).unwrap());
    assert!((rows[0][1] - 1.0 / 1f64.cosh()).abs() < 1e-9);
    let dir = write_config(tmp.path(), "dir.json", &scalar_config("dirichlet"));
    run_ok(tmp.path(), &["solve", dir.to_str().unwrap(), "--output-dir", "d"]);
    let rows = data_rows(&fs::read_to_string(tmp.path().join("d/solution.csv")).unwrap());
    assert!((rows[64][1] - 0.5f64.sinh() / 1f64.sinh()).abs() < 1e-9);
}

#[test]
fn compare_scalar_cases_against_oracle() {
    let tmp = TempDir::new().unwrap();
    for boundary in ["robin", "dirichlet"] {
        let mut cfg = scalar_config(boundary);
        cfg["compare"] = json!({"nx_values": [1025, 2049, 4097]});
        let path = write_config(tmp.path(), &format!("{boundary}.json"), &cfg);
        run_ok(
            tmp.path(),
            &["compare", path.to_str().unwrap(), "--output-dir", boundary],
        );
        let rows = data_rows(&fs::read_to_string(tmp.path().join(boundary).join("compare.csv")).unwrap());
        assert_eq!(rows.len(), 3);
        assert!(rows[2][1] <= 1e-8, "{boundary}: {:?}", rows[2]);
        assert!((1.8..=2.2).contains(&rows[2][3]), "order {:?}", rows[2]);
    }
}

#[test]
fn scan_first_case_is_flat_and_deterministic() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "scan.json", &wentzell_scan());
    let p = path.to_str().unwrap();
    run_ok(tmp.path(), &["scan", p, "--output-dir", "a"]);
    run_ok(tmp.path(), &["scan", p, "--output-dir", "b", "--threads", "3"]);
    let summary: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("a/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["verdict"], "flat");
    let names: Vec<String> = fs::read_dir(tmp.path().join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    assert!(!names.is_empty());
    for name in names {
        let a = fs::read(tmp.path().join("a").join(&name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn seed_flag_changes_the_hash() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = scalar_config("robin");
    cfg["data"]["f"] = json!({"kind": "seeded"});
    let path = write_config(tmp.path(), "s.json", &cfg);
    let p = path.to_str().unwrap();
    run_ok(tmp.path(), &["solve", p, "--output-dir", "s0"]);
    run_ok(tmp.path(), &["solve", p, "--output-dir", "s1", "--seed", "1"]);
    let a = fs::read_to_string(tmp.path().join("s0/solution.csv")).unwrap();
    let b = fs::read_to_string(tmp.path().join("s1/solution.csv")).unwrap();
    let hash = |s: &str| s.lines().find(|l| l.contains("config_sha256")).unwrap().to_string();
    assert_ne!(hash(&a), hash(&b));
    assert_ne!(data_rows(&a), data_rows(&b));
}

#[test]
fn invalid_config_exits_1_with_field() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = scalar_config("robin");
    cfg["nx"] = json!("many");
    let path = write_config(tmp.path(), "bad.json", &cfg);
    let out = opcalc(&["solve", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`nx`") && err.contains("bad.json:"), "{err}");

    let mut missing = scalar_config("robin");
    missing.as_object_mut().unwrap().remove("point");
    let path = write_config(tmp.path(), "nopoint.json", &missing);
    let out = opcalc(&["solve", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`point`"));
}

#[test]
fn region_violation_exits_2() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "operator_a": {"kind": "laplacian1d", "dim": 8, "grid_step": 1.0 / 9.0},
        "operator_h": {"kind": "wentzell", "dim": 8, "grid_step": 1.0 / 9.0},
        "nx": 65,
        "evolve": {"dt": 0.01, "steps": 3, "mu": [0.0, 0.0], "r": 1e9}
    });
    let path = write_config(tmp.path(), "ev.json", &cfg);
    let out = opcalc(&["evolve", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn numerical_failure_exits_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "operator_a": {"kind": "custom", "dim": 2, "grid_step": 1.0, "parameters": {"value": 1.0}},
        "operator_h": {"kind": "custom", "dim": 2, "grid_step": 1.0, "parameters": {"value": 0.0}},
        "point": {"lambda": [0.0, 0.0], "mu": [0.0, 0.0]}
    });
    let path = write_config(tmp.path(), "cut.json", &cfg);
    let out = opcalc(&["solve", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn evolve_and_probe_write_artifacts() {
    let tmp = TempDir::new().unwrap();
    let cfg = json!({
        "operator_a": {"kind": "laplacian1d", "dim": 8, "grid_step": 1.0 / 9.0},
        "operator_h": {"kind": "wentzell", "dim": 8, "grid_step": 1.0 / 9.0},
        "nx": 65,
        "evolve": {"dt": 0.01, "steps": 10, "mu": [50.0, 0.0], "r": 4.0},
        "probe": {"kind": "hq_decay", "ts": [0.0, 1.0, 10.0, 100.0, 1000.0]}
    });
    let path = write_config(tmp.path(), "ev.json", &cfg);
    let p = path.to_str().unwrap();
    run_ok(tmp.path(), &["evolve", p, "--output-dir", "e"]);
    let rows = data_rows(&fs::read_to_string(tmp.path().join("e/trajectory.csv")).unwrap());
    assert_eq!(rows.len(), 11);
    assert!(rows.windows(2).all(|w| w[1][2] <= w[0][2]));
    run_ok(tmp.path(), &["probe", p, "--output-dir", "p"]);
    let probe: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("p/probe.json")).unwrap()).unwrap();
    assert!(probe["hq_decay"]["constant_estimate"].as_f64().unwrap() > 0.0);
}

#[test]
fn threads_env_fallback_is_accepted() {
    let tmp = TempDir::new().unwrap();
    let path = write_config(tmp.path(), "scan.json", &wentzell_scan());
    let out = Command::new(env!("CARGO_BIN_EXE_opcalc"))
        .args(["scan", path.to_str().unwrap(), "--output-dir", "t"])
        .current_dir(tmp.path())
        .env("OPCALC_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_opcalc"))
        .args(["scan", path.to_str().unwrap()])
        .current_dir(tmp.path())
        .env("OPCALC_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!out.status.success());
}
