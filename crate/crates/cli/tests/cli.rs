use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn mutlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mutlab")).args(args).env_remove("MUTLAB_BUDGET_MULT").output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn analyze_prime_accounts_for_every_mutant() {
    let prime = corpus("prime.ml0");
    let out = stdout(&mutlab(&["analyze", "--program", prime.to_str().unwrap(), "--strategy", "exec-taints"]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema"], "mutlab/1");
    assert_eq!(v["strategy"], "exec-taints-f-m");
    assert_eq!(v["seed"], 42);
    assert_eq!(v["budget_mult"], 10);
    let t = &v["totals"];
    let sum = t["killed"].as_u64().unwrap() + t["survived"].as_u64().unwrap() + t["not_covered"].as_u64().unwrap();
    assert_eq!(sum, t["mutants"].as_u64().unwrap());
    assert_eq!(sum, 60);
    assert_eq!(v["mutants"].as_array().unwrap().len(), 60);
}

#[test]
fn flags_select_the_engine_variant() {
    let euler = corpus("euler.ml0");
    let p = euler.to_str().unwrap();
    let out = stdout(&mutlab(&["analyze", "--program", p, "--strategy", "exec-taints", "--no-fork", "--no-memo"]));
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["strategy"], "exec-taints-nf-nm");
    let csv = stdout(&mutlab(&["analyze", "--program", p, "--strategy", "modulo-state", "--format", "csv"]));
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("euler,modulo-state,35,"));
}

#[test]
fn budget_multiplier_comes_from_the_environment() {
    let euler = corpus("euler.ml0");
    let o = Command::new(env!("CARGO_BIN_EXE_mutlab"))
        .args(["analyze", "--program", euler.to_str().unwrap()])
        .env("MUTLAB_BUDGET_MULT", "3")
        .output()
        .unwrap();
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["budget_mult"], 3);
}

#[test]
fn compare_lists_seven_agreeing_rows() {
    let euler = corpus("euler.ml0");
    let csv = stdout(&mutlab(&["compare", "--program", euler.to_str().unwrap(), "--all", "--format", "csv"]));
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 7);
    for r in &rows {
        assert_eq!(r[2..6], rows[0][2..6]);
    }
}

#[test]
fn compare_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let newton = corpus("newton.ml0");
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        stdout(&mutlab(&["compare", "--program", newton.to_str().unwrap(), "--all", "--out", out.to_str().unwrap()]));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn mutants_list_prints_one_line_per_mutant() {
    let tp1 = corpus("fixtures/tp1.ml0");
    let out = stdout(&mutlab(&["mutants", "list", "--program", tp1.to_str().unwrap()]));
    assert_eq!(out.lines().count(), 15);
    assert_eq!(out.lines().next().unwrap(), "M1 2:9 + -> - in f");
}

#[test]
fn corpus_run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    stdout(&mutlab(&["corpus", "run", "--out", dir.path().to_str().unwrap()]));
    for name in ["caesar_cypher", "entropy", "euler", "newton", "prime"] {
        let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("{name}.json"))).unwrap()).unwrap();
        assert_eq!(v["runs"].as_array().unwrap().len(), 7);
    }
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5 * 7);
}

#[test]
fn fuzz_single_seed_agrees() {
    let out = stdout(&mutlab(&["fuzz", "--count", "1", "--seed", "0"]));
    assert!(out.starts_with("seed 0: ") && out.trim_end().ends_with("7 strategies agree"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let failing = dir.path().join("failing.ml0");
    std::fs::write(&failing, "def f(x):\n  return x + 1\n\ndef test_f():\n  assert f(1) == 3\n").unwrap();
    let broken = dir.path().join("broken.ml0");
    std::fs::write(&broken, "def f(x):\n  return x +\n").unwrap();
    assert_eq!(mutlab(&["analyze", "--program", failing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(mutlab(&["analyze", "--program", broken.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(mutlab(&["analyze", "--program", "/nonexistent.ml0"]).status.code(), Some(2));
    assert_eq!(mutlab(&["analyze", "--strategy", "nope", "--program", failing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(mutlab(&["compare", "--program", failing.to_str().unwrap()]).status.code(), Some(2));
}
