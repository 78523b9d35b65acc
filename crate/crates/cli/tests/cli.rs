use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn tia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tia")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn file(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const POINT: &str = r#"{"lattice":{"h":"1"},"terms":[{"coeff":"1","gen":{"kind":"point","a":0,"m":0,"n":0}}]}"#;
const STICK: &str = r#"{"lattice":{"h":"1"},"terms":[{"coeff":"1","gen":{"kind":"interval","a":0,"b":1,"m":0,"n":0}}]}"#;

#[test]
fn product_of_point_and_stick_end() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (file(&dir, "a.json", POINT), file(&dir, "b.json", STICK));
    let out = dir.path().join("ab.json");
    let o = tia(&["product", s(&a), s(&b), "-o", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let terms = v["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["coeff"], "1/2");
    assert_eq!(terms[0]["gen"]["kind"], "point");
    assert_eq!((terms[0]["gen"]["m"].as_u64(), terms[0]["gen"]["n"].as_u64()), (Some(1), Some(0)));
}

#[test]
fn empty_chain_gives_empty_chain() {
    let dir = TempDir::new().unwrap();
    let empty = file(&dir, "empty.json", r#"{"lattice":{"h":"1"},"terms":[]}"#);
    let b = file(&dir, "b.json", STICK);
    let o = tia(&["product", s(&empty), s(&b)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["terms"].as_array().unwrap().len(), 0);
}

#[test]
fn boundary_of_a_stick() {
    let dir = TempDir::new().unwrap();
    let b = file(&dir, "b.json", STICK);
    let o = tia(&["boundary", s(&b)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let coeffs: Vec<&str> = v["terms"].as_array().unwrap().iter().map(|t| t["coeff"].as_str().unwrap()).collect();
    assert_eq!(coeffs.len(), 2);
    assert!(coeffs.contains(&"1") && coeffs.contains(&"-1"));
}

#[test]
fn malformed_input_names_the_field() {
    let dir = TempDir::new().unwrap();
    let b = file(&dir, "b.json", STICK);
    let bad = file(&dir, "bad.json", r#"{"lattice":{"h":"1"},"terms":[{"coef":"1","gen":{"kind":"point","a":0,"m":0,"n":0}}]}"#);
    let o = tia(&["product", s(&bad), s(&b)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("coef"), "{}", stderr(&o));
    let broken = file(&dir, "broken.json", "{not json");
    assert_eq!(code(&tia(&["product", s(&broken), s(&b)])), 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&tia(&["boundary", s(&missing)])), 2);
}

#[test]
fn lattice_mismatch_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let a = file(&dir, "a.json", POINT);
    let ring = file(&dir, "ring.json", &STICK.replace(r#"{"h":"1"}"#, r#"{"h":"1","period":5}"#));
    let o = tia(&["product", s(&a), s(&ring)]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn tensor_chains_multiply() {
    let dir = TempDir::new().unwrap();
    let cell = |factors: &str| {
        format!(r#"{{"lattices":[{{"h":"1"}},{{"h":"1"}}],"terms":[{{"coeff":"1","factors":[{factors}]}}]}}"#)
    };
    let a = file(&dir, "a.json", &cell(r#"{"kind":"point","a":0,"m":0,"n":0},{"kind":"interval","a":-1,"b":1,"m":0,"n":0}"#));
    let b = file(&dir, "b.json", &cell(r#"{"kind":"interval","a":-1,"b":1,"m":0,"n":0},{"kind":"point","a":0,"m":0,"n":0}"#));
    let o = tia(&["product", s(&a), s(&b)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["terms"].as_array().unwrap().len(), 1);
    let one_d = file(&dir, "p.json", POINT);
    assert_eq!(code(&tia(&["product", s(&a), s(&one_d)])), 3);
}

#[test]
fn verify_reports_the_ideal_counterexample_on_the_line() {
    let o = tia(&["verify", "--dims", "1", "--dec-bound", "2", "--window", "4"]);
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    for name in ["commutativity", "associativity", "leibniz", "boundary squared"] {
        let line = text.lines().find(|l| l.starts_with(name)).unwrap();
        assert!(line.contains(" ok "), "{line}");
    }
    let ideal = text.lines().find(|l| l.starts_with("ideal closure")).unwrap();
    assert!(ideal.contains("FAIL"), "{text}");
    assert!(text.contains("first counterexample"), "{text}");
    assert!(text.trim_end().ends_with("FAIL"));
}

#[test]
fn verify_passes_in_three_dimensions() {
    let o = tia(&["verify", "--dims", "3", "--dec-bound", "1", "--window", "3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).trim_end().ends_with("PASS"));
}

#[test]
fn corrupted_table_fails_the_sweep() {
    let o = tia(&["verify", "--dims", "1", "--dec-bound", "0", "--window", "3", "--fixture", "corrupt-stick-endpoint"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("associativity") && stdout(&o).contains("first counterexample"), "{}", stdout(&o));
}

#[test]
fn verify_limits_are_usage_errors() {
    assert_eq!(code(&tia(&["verify", "--dims", "4"])), 3);
    assert_eq!(code(&tia(&["verify", "--dec-bound", "5"])), 3);
    assert_eq!(code(&tia(&["verify", "--window", "6"])), 3);
}

#[test]
fn oracle_agrees_on_undecorated_generators() {
    let o = tia(&["oracle-check", "--dec-bound", "0", "--window", "3"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("AGREE: "), "{}", stdout(&o));
}

#[test]
fn swapped_binomials_disagree_with_the_oracle() {
    let o = tia(&["oracle-check", "--dec-bound", "1", "--window", "2", "--fixture", "swapped-binomial"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("DISAGREE"));
}

#[test]
fn fluid_build_reports_definiteness() {
    let o = tia(&["fluid", "build", "-n", "3", "--delta", "1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dim_v"], 52);
    assert_eq!(v["definiteness"]["positive_definite"], true);
    assert_eq!(code(&tia(&["fluid", "build", "-n", "2"])), 3);
    assert_eq!(code(&tia(&["fluid", "build", "-n", "3", "--delta", "2"])), 3);
}

#[test]
fn midpoint_run_conserves_energy() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("run.csv");
    let o = tia(&["fluid", "run", "-n", "3", "--method", "midpoint", "--steps", "100", "-o", s(&csv)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,time,energy,helicity"));
    let energy: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(energy.len(), 101);
    let drift = energy.iter().map(|e| (e - energy[0]).abs() / energy[0]).fold(0.0, f64::max);
    assert!(drift < 1e-10, "drift {drift}");
    let state: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(state["steps"], 100);
    assert_eq!(state["state"].as_array().unwrap().len(), 52);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let o = tia(&["fluid", "run", "-n", "3", "--method", "rk4", "--steps", "10", "--seed", "4", "-o", s(&p)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        (fs::read(&p).unwrap(), fs::read(p.with_extension("json")).unwrap())
    };
    assert_eq!(run("a.csv"), run("b.csv"));
    let a = file(&dir, "a.json", POINT);
    let b = file(&dir, "b.json", STICK);
    assert_eq!(stdout(&tia(&["product", s(&a), s(&b)])), stdout(&tia(&["product", s(&a), s(&b)])));
}
