use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

use sheafconv::interval::{Barcode, GradedBarcode};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sheafconv")).args(args).output().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p
}

fn bar(l: i64, r: i64) -> Value {
    json!({ "bars": [{ "left": l, "right": r }] })
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn derived_convolutions_of_two_bars() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (write(dir.path(), "a.json", &bar(0, 2)), write(dir.path(), "b.json", &bar(0, 3)));
    let o = run(&["convolve", "--cosheaf", "--derived", s(&a), s(&b)]);
    assert!(o.status.success());
    let g = GradedBarcode::from_json(&stdout_json(&o)).unwrap();
    assert_eq!(g.degree(0), Barcode::from_json(&bar(0, 2)).unwrap());
    assert_eq!(g.degree(1), Barcode::from_json(&bar(3, 5)).unwrap());

    let o = run(&["convolve", "--sheaf", "--derived", s(&a), s(&b)]);
    let g = GradedBarcode::from_json(&stdout_json(&o)).unwrap();
    assert_eq!(g.degree(0), Barcode::from_json(&bar(3, 5)).unwrap());
    assert_eq!(g.degree(1), Barcode::from_json(&bar(0, 2)).unwrap());
}

#[test]
fn distance_to_itself() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", &json!({ "bars": [{ "left": 0, "right": 2 }, { "left": "1/2", "right": "inf" }] }));
    let o = run(&["distance", s(&a), s(&a)]);
    assert!(o.status.success());
    assert_eq!(stdout_json(&o)["value"], "0");

    let b = write(dir.path(), "b.json", &bar(0, 3));
    let o = run(&["distance", s(&a), s(&b)]);
    assert_eq!(stdout_json(&o)["value"], "inf");
}

#[test]
fn seeded_oracle_passes() {
    let o = run(&["oracle", "--seed", "7", "--trials", "50"]);
    assert!(o.status.success());
    assert_eq!(stdout_json(&o), json!({ "pass": 50, "fail": 0 }));
}

#[test]
fn window_outside_the_safe_range() {
    let o = run(&["oracle", "--seed", "1", "--trials", "2", "--window", "-2,22"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["oracle", "--seed", "1", "--trials", "2", "--window", "-40,22"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn schema_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", &json!({ "intervals": [] }));
    let o = run(&["convolve", "--sheaf", s(&bad), s(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["distance", s(&missing), s(&missing)]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn stability_files() {
    let dir = TempDir::new().unwrap();
    let k = write(dir.path(), "k.json", &json!({ "simplices": [[0], [1], [2], [0, 1], [1, 2], [0, 2]] }));
    let f = write(dir.path(), "f.json", &json!({ "0": 0.0, "1": 1.5, "2": "3" }));
    let g = write(dir.path(), "g.json", &json!({ "0": 0.25, "1": 1, "2": 3 }));
    let o = run(&["stability", s(&k), s(&f), s(&g), "--degree", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["holds"], true);
    assert_eq!(v["sup_norm"], "1/2");
}

#[test]
fn deterministic_and_round_trips() {
    for args in [
        &["oracle", "--seed", "3", "--trials", "5"][..],
        &["stability", "--seed", "3", "--trials", "5"],
        &["adjunction-check", "--seed", "3", "--trials", "3"],
    ] {
        let (x, y) = (run(args), run(args));
        assert_eq!(x.stdout, y.stdout, "{args:?}");
        let v = stdout_json(&x);
        assert_eq!(serde_json::from_str::<Value>(&v.to_string()).unwrap(), v);
    }
    let dir = TempDir::new().unwrap();
    let (a, b) = (write(dir.path(), "a.json", &bar(1, 4)), write(dir.path(), "b.json", &bar(2, 7)));
    let o = run(&["convolve", "--sheaf", "--derived", s(&a), s(&b)]);
    let v = stdout_json(&o);
    assert_eq!(GradedBarcode::from_json(&v).unwrap().to_json(), v);
}
