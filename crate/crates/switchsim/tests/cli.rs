//! End-to-end runs of the `switchsim` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use switchsim::graph_io::graph_to_json;
use switchsim_core::immersion::switch_circuit_4event;
use tempfile::TempDir;

fn switchsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_switchsim")).args(args).env_remove("SWITCHSIM_TOL").output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const IDENTITY: &str = r#"{"scenario": "four_event",
    "u": [[[1,0],[0,0]], [[0,0],[1,0]]],
    "v": [[[1,0],[0,0]], [[0,0],[1,0]]],
    "psi": [[1,0],[0,0]]}"#;

const X_Z: &str = r#"{"scenario": "four_event",
    "u": [[[0,0],[1,0]], [[1,0],[0,0]]],
    "v": [[[1,0],[0,0]], [[0,0],[-1,0]]],
    "psi": [[1,0],[0,0]]}"#;

#[test]
fn run_identity() {
    let dir = TempDir::new().unwrap();
    let out = switchsim(&["run", s(&write(&dir, "id.json", IDENTITY))]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["entries"]["(0,v)"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["sum"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn run_oracle_check() {
    let dir = TempDir::new().unwrap();
    let out = switchsim(&["run", s(&write(&dir, "xz.json", X_Z)), "--oracle-check"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["oracle_max_deviation"].as_f64().unwrap() <= 1e-10);
    assert!((v["entries"]["(v,1)"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn run_csv() {
    let dir = TempDir::new().unwrap();
    let out = switchsim(&["run", s(&write(&dir, "xz.json", X_Z)), "--out", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("alpha,beta,probability\n"));
    assert_eq!(text.lines().count(), 10);
}

#[test]
fn run_every_kind_from_seed() {
    let dir = TempDir::new().unwrap();
    for kind in ["four_event", "three_event", "two_event_norec", "two_event_rec"] {
        let cfg = write(&dir, "k.json", &format!(r#"{{"scenario": "{kind}", "seed": 3}}"#));
        let out = switchsim(&["run", s(&cfg), "--oracle-check"]);
        assert_eq!(code(&out), 0, "{kind}: {}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        assert!((v["sum"].as_f64().unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(v["entries"].as_object().unwrap().len(), if kind.starts_with("two") { 6 } else { 9 });
    }
}

#[test]
fn run_rejects_non_unitary() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "bad.json", &IDENTITY.replacen("[[[1,0],[0,0]], [[0,0],[1,0]]]", "[[[1,0],[0,0]], [[0,0],[0,0]]]", 1));
    let out = switchsim(&["run", s(&cfg)]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("not unitary"));
}

#[test]
fn run_parse_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&switchsim(&["run", s(&write(&dir, "x.json", "{"))])), 2);
    assert_eq!(code(&switchsim(&["run", s(&dir.path().join("missing.json"))])), 2);
    assert_eq!(code(&switchsim(&["run", s(&write(&dir, "id.json", IDENTITY)), "--out", "xml"])), 2);
    assert_eq!(code(&switchsim(&["bogus"])), 2);
}

#[test]
fn tolerance_override() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "k.json", r#"{"scenario": "two_event_rec", "seed": 1}"#);
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_switchsim"))
            .args(["run", s(&cfg), "--oracle-check"])
            .env("SWITCHSIM_TOL", tol)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("1e-8")), 0);
    assert_eq!(code(&run("nonsense")), 2);
    // A tolerance below the rounding floor turns the check into a mismatch or an invariant failure.
    assert!(matches!(code(&run("1e-300")), 3 | 4));
}

#[test]
fn friend_variants() {
    let out = switchsim(&["friend", "--variant", "grav_2event"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["M"]["0"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(v["classification"], "distinguishable_as_2event");
    assert_eq!(v["distinct_arrival_labels"], 2);

    let v = json(&switchsim(&["friend", "--variant", "optical_4event", "--seed", "5"]));
    assert!((v["M"]["1"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((v["erase"]["+"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert!((v["erase"]["\u{2212}"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert!((v["post_state_purity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(v["arrival_counts"].as_object().unwrap().len(), 4);

    let v = json(&switchsim(&["friend", "--variant", "optical_3event"]));
    assert_eq!(v["distinct_arrival_labels"], 3);

    let out = switchsim(&["friend", "--variant", "nope"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn friend_is_deterministic() {
    let a = switchsim(&["friend", "--variant", "grav_2event_nomeet", "--seed", "9"]);
    let b = switchsim(&["friend", "--variant", "grav_2event_nomeet", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn immerse_diamond() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "d.dot", "digraph diamond {\n a -> b\n a -> c\n b -> d\n c -> d\n}\n");
    let out = switchsim(&["immerse", s(&g), "--verify"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["points"].as_object().unwrap().len(), 4);
    assert_eq!(v["time_slices"], 3);
    assert_eq!(v["verification"]["order_preserved"], true);
}

#[test]
fn immerse_switch_circuit_to_file() {
    let dir = TempDir::new().unwrap();
    let g = write(&dir, "switch.json", &graph_to_json(&switch_circuit_4event()).to_string());
    let dest = dir.path().join("map.json");
    let out = switchsim(&["immerse", s(&g), "--verify", "--out", s(&dest)]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&dest).unwrap()).unwrap();
    assert_eq!(v["time_slices"], 6);
    assert_eq!(v["verification"]["order_preserved"], true);
}

#[test]
fn immerse_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&switchsim(&["immerse", s(&write(&dir, "c.dot", "digraph { a -> b -> c -> a }"))])), 5);
    assert_eq!(code(&switchsim(&["immerse", s(&write(&dir, "c.json", r#"{"edges": [["x","x"]]}"#))])), 5);
    assert_eq!(code(&switchsim(&["immerse", s(&write(&dir, "bad.dot", "digraph { a -> }"))])), 2);
    assert_eq!(code(&switchsim(&["immerse", s(&write(&dir, "bad.json", r#"{"nodes": 3}"#))])), 2);
}

#[test]
fn sweep_four_event() {
    let out = switchsim(&["sweep", "--n", "500", "--scenario", "four_event"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    for key in ["max_normalization_error", "max_closed_form_deviation", "max_oracle_deviation"] {
        assert!(v[key].as_f64().unwrap() <= 1e-10, "{key}");
    }
}

#[test]
fn sweep_is_byte_identical() {
    let a = switchsim(&["sweep", "--n", "1", "--seed", "0"]);
    let b = switchsim(&["sweep", "--n", "1", "--seed", "0"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sweep_errors() {
    assert_eq!(code(&switchsim(&["sweep", "--n", "0"])), 2);
    assert_eq!(code(&switchsim(&["sweep", "--n", "3", "--scenario", "six_event"])), 2);
    let out = Command::new(env!("CARGO_BIN_EXE_switchsim"))
        .args(["sweep", "--n", "4", "--seed", "2"])
        .env("SWITCHSIM_TOL", "1e-300")
        .output()
        .unwrap();
    assert_eq!(code(&out), 4);
    assert!(json(&out)["offending"]["config"]["psi"].is_array());
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed 2"));
}
