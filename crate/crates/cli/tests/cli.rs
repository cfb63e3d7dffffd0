//! End-to-end tests of the `calf` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use calf_core::parse::parse_term;
use calf_core::syntax::alpha_eq;
use calf_core::NatCost;
use serde_json::Value;

fn calf() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_calf"));
    cmd.env_remove("CALF_COST_MODEL");
    cmd
}

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn calf_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "calf"))
        .collect();
    files.sort();
    files
}

fn scratch(name: &str, source: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("calf-cli-tests-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, source).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    calf().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("bad JSON {text:?}: {e}"))
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn check_exit_codes() {
    let good = corpus().join("bind_chain.calf");
    assert_eq!(code(&run(&["check", good.to_str().unwrap()])), 0);

    let polar = scratch("polar.calf", "main : F nat = ret (\\x. ret x)\n");
    let out = run(&["check", polar.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("polarity"));

    assert_eq!(code(&run(&["check", "/nonexistent/missing.calf"])), 3);

    let broken = scratch("broken.calf", "main : F nat = bind x <- ret 0\n");
    assert_eq!(code(&run(&["check", broken.to_str().unwrap()])), 2);
}

#[test]
fn run_reports_cost_in_the_cost_world_only() {
    let p = scratch("three.calf", "main : F nat = step{3} ret 2\n");
    let out = run(&["run", p.to_str().unwrap()]);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "{\"cost\":\"3\",\"value\":\"suc (suc 0)\"}\n"
    );
    let out = run(&["run", "--phase", "beh", p.to_str().unwrap()]);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        "{\"value\":\"suc (suc 0)\"}\n"
    );

    let p = scratch(
        "bind.calf",
        "main : F nat = bind x <- step{2} ret 1; step{1} ret (suc x)\n",
    );
    assert_eq!(
        json(&run(&["run", p.to_str().unwrap()])),
        serde_json::json!({"cost": "3", "value": "suc (suc 0)"})
    );

    let out = run(&["run", "--timing", p.to_str().unwrap()]);
    assert!(json(&out).get("elapsed_ms").is_some());
}

#[test]
fn cost_model_flag_and_environment() {
    let p = scratch(
        "max.calf",
        "main : F nat = bind x <- step{3} ret 0; step{2} ret x\n",
    );
    let path = p.to_str().unwrap();
    assert_eq!(json(&run(&["run", path]))["cost"], "5");
    assert_eq!(
        json(&run(&["run", "--cost-model", "nat-max", path]))["cost"],
        "3"
    );
    let out = calf()
        .env("CALF_COST_MODEL", "nat-max")
        .args(["run", path])
        .output()
        .unwrap();
    assert_eq!(json(&out)["cost"], "3");

    let pair = scratch(
        "pair.calf",
        "main : F nat = step{(1,2)} step{(3,0)} ret 0\n",
    );
    let out = run(&[
        "run",
        "--cost-model",
        "pair:nat,nat",
        pair.to_str().unwrap(),
    ]);
    assert_eq!(json(&out)["cost"], "(4,2)");
    let out = run(&[
        "run",
        "--cost-model",
        "pair:nat,nat-max",
        pair.to_str().unwrap(),
    ]);
    assert_eq!(json(&out)["cost"], "(4,2)");
    let out = run(&[
        "run",
        "--cost-model",
        "pair:nat-max,nat-max",
        pair.to_str().unwrap(),
    ]);
    assert_eq!(json(&out)["cost"], "(3,2)");

    // a literal that does not belong to the active monoid is a parse error
    assert_eq!(
        code(&run(&["run", "--cost-model", "pair:nat,nat", path])),
        2
    );
}

#[test]
fn canonize_reports() {
    let canonical = scratch("canon.calf", "main : F nat = step{4} ret 1\n");
    let out = json(&run(&["canonize", "--verify", canonical.to_str().unwrap()]));
    assert_eq!(out["verified"], true);
    assert_eq!(out["trace_len"], 0);

    let ind = corpus().join("ind_under_step.calf");
    let count = scratch(
        "ind.calf",
        "main : F nat = ind 2 at n. F nat { zero => ret 0 | suc m, r => step{1} bind y <- r; ret (suc y) }\n",
    );
    let out = json(&run(&["canonize", "--verify", count.to_str().unwrap()]));
    assert_eq!(out["cost"], "2");
    assert_eq!(out["numeral"], 2);
    assert_eq!(out["verified"], true);

    let out = run(&["canonize", "--verify", "--fuel", "1", ind.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verified"], "undecided");

    let out = run(&["canonize", ind.to_str().unwrap()]);
    assert!(json(&out).get("verified").is_none());

    let out = run(&["canonize", "--verify", "--trace", count.to_str().unwrap()]);
    let trace = String::from_utf8_lossy(&out.stderr);
    let n = json(&out)["trace_len"].as_u64().unwrap() as usize;
    assert_eq!(trace.lines().count(), n);
    assert!(trace.lines().all(|l| l.contains(" @ lhs:")));
}

#[test]
fn canonize_rejects_non_nat_main() {
    let p = scratch(
        "pair_main.calf",
        "main : F (Sig (a : nat) nat) = ret (0, 1)\n",
    );
    let out = run(&["canonize", p.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("F nat"));
    // running it is fine
    let out = run(&["run", p.to_str().unwrap()]);
    assert_eq!(json(&out)["value"], "(0, suc 0)");
}

#[test]
fn corpus_matches_sidecars() {
    let files = calf_files(&corpus());
    assert!(files.len() >= 30);
    for file in files {
        let path = file.to_str().unwrap();
        let sidecar = file.with_extension("expect.json");
        let expect: Value = serde_json::from_str(&fs::read_to_string(&sidecar).unwrap()).unwrap();
        let ran = json(&run(&["run", path]));
        assert_eq!(ran["cost"], expect["cost"], "{path}: cost");
        assert_eq!(ran["value"], expect["value"], "{path}: value");
        let canon = json(&run(&["canonize", "--verify", path]));
        assert_eq!(canon["numeral"], expect["numeral"], "{path}: numeral");
        assert_eq!(canon["cost"], expect["cost"], "{path}: canonical cost");
        assert_eq!(canon["verified"], true, "{path}");

        // the printed witness reads back as the same term
        let witness = parse_term::<NatCost>(canon["witness"].as_str().unwrap()).unwrap();
        let reprinted = calf_core::pretty::term(&witness);
        assert_eq!(reprinted, canon["witness"].as_str().unwrap());
        let again = parse_term::<NatCost>(&reprinted).unwrap();
        assert!(alpha_eq(&witness, &again));
    }
}

#[test]
fn reject_corpus_fails_with_located_diagnostics() {
    let files = calf_files(&corpus().join("reject"));
    assert_eq!(files.len(), 20);
    for file in files {
        let out = run(&["check", file.to_str().unwrap()]);
        assert_eq!(code(&out), 1, "{}", file.display());
        let err = String::from_utf8_lossy(&out.stderr);
        let first = err.lines().next().unwrap_or_default();
        assert!(first.starts_with(&format!("{}:", file.display())), "{err}");
        assert!(err.contains('^'), "{err}");
    }
}

#[test]
fn laws_default_run_and_mutations() {
    let out = run(&["laws", "--count", "40"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let table = String::from_utf8_lossy(&out.stdout);
    assert!(table
        .lines()
        .any(|l| l.starts_with("bind-beta") && l.contains(" 40 ")));

    for mutation in ["bind-step-drop-cost", "ap-step-double-cost"] {
        let out = run(&["laws", "--count", "40", "--mutate", mutation]);
        assert_eq!(code(&out), 1, "{mutation}");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("FAIL "), "{mutation}");
        assert!(text.contains("seed 0"), "failures carry the seed");
    }
}

#[test]
fn laws_are_deterministic() {
    let a = run(&["laws", "--seed", "5", "--count", "30"]);
    let b = run(&["laws", "--seed", "5", "--count", "30"]);
    assert_eq!(a.stdout, b.stdout);
}
