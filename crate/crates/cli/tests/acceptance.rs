//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs without the libtest harness so that the lines are printed
//! even when everything passes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use calf_cli::laws::{run_laws, LawConfig, Schema};
use calf_core::eval::{canonize, erase, run_beh, run_cost, DEFAULT_STEP_LIMIT};
use calf_core::gen::{gen_term, Target};
use calf_core::parse::{parse, parse_term};
use calf_core::rewrite::{prove_equal, RewriteConfig, Verdict};
use calf_core::syntax::{as_numeral, CostExpr, Term};
use calf_core::{NatCost, NatTerm};
use serde_json::Value;

const CORPUS_MIN_PROGRAMS: usize = 30;
const GENERATED_PROGRAMS: u64 = 500;
const GENERATED_MAX_SIZE: usize = 30;
const VERIFY_FUEL: u64 = 100_000;
const MIN_GENERATED_VERIFIED: f64 = 0.99;
const CANONICITY_TIME_BUDGET: Duration = Duration::from_secs(60);
const LAW_INSTANCES: usize = 200;
const LAW_SCHEMAS: usize = 8;
const COUNT_INPUTS: std::ops::RangeInclusive<u64> = 0..=8;
const REJECT_FILES: usize = 20;

type Criterion = Result<String, String>;
type Plus = dyn Fn(u64, u64) -> u64;
type Named = (&'static str, fn() -> Criterion);

fn calf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calf"))
        .env_remove("CALF_COST_MODEL")
        .args(args)
        .output()
        .expect("spawn calf")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or(Value::Null)
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn calf_files(dir: &Path) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map(|rd| rd.filter_map(|e| e.ok().map(|e| e.path())).collect())
        .unwrap_or_default();
    files.retain(|p| p.extension().is_some_and(|x| x == "calf"));
    files.sort();
    files
}

fn corpus_terms() -> Vec<(String, NatTerm)> {
    calf_files(&corpus_dir())
        .into_iter()
        .map(|p| {
            let src = fs::read_to_string(&p).unwrap();
            let file = parse::<NatCost>(&src).unwrap_or_else(|e| panic!("{}: {e:?}", p.display()));
            (p.display().to_string(), file.closed_main())
        })
        .collect()
}

fn generated_terms() -> Vec<(String, NatTerm)> {
    (0..GENERATED_PROGRAMS)
        .map(|seed| {
            let size = 1 + (seed as usize % GENERATED_MAX_SIZE);
            (
                format!("generated seed {seed} size {size}"),
                gen_term(seed, size, Target::FNat),
            )
        })
        .collect()
}

/// 1. Corpus and generated programs are proved equal to their canonical forms.
fn canonicity() -> Criterion {
    let start = Instant::now();
    let files = calf_files(&corpus_dir());
    if files.len() < CORPUS_MIN_PROGRAMS {
        return Err(format!("only {} corpus programs", files.len()));
    }
    for f in &files {
        let fuel = VERIFY_FUEL.to_string();
        let out = calf(&["canonize", "--verify", "--fuel", &fuel, f.to_str().unwrap()]);
        if json(&out)["verified"] != Value::Bool(true) {
            return Err(format!(
                "{} not verified: {}",
                f.display(),
                String::from_utf8_lossy(&out.stdout)
            ));
        }
    }
    let cfg = RewriteConfig::with_fuel(VERIFY_FUEL);
    let (mut verified, mut undecided) = (0usize, 0usize);
    for (name, t) in generated_terms() {
        let canon = canonize(&t, DEFAULT_STEP_LIMIT).map_err(|e| format!("{name}: {e}"))?;
        match prove_equal(&t, &canon.witness, false, &cfg) {
            Verdict::Equal(_) => verified += 1,
            Verdict::Undecided { .. } => undecided += 1,
            Verdict::Distinct { .. } => return Err(format!("{name}: refuted")),
        }
    }
    let ratio = verified as f64 / GENERATED_PROGRAMS as f64;
    let elapsed = start.elapsed();
    if ratio < MIN_GENERATED_VERIFIED {
        return Err(format!(
            "generated verified ratio {ratio:.3} < {MIN_GENERATED_VERIFIED}"
        ));
    }
    if elapsed > CANONICITY_TIME_BUDGET {
        return Err(format!("took {elapsed:?}"));
    }
    Ok(format!(
        "{} corpus verified, generated {verified}/{GENERATED_PROGRAMS} verified, {undecided} undecided, 0 false, {:.1}s",
        files.len(),
        elapsed.as_secs_f64()
    ))
}

/// 2. Erasing the cost-world result equals the behavioral result.
fn erasure_square() -> Criterion {
    let all: Vec<_> = corpus_terms()
        .into_iter()
        .chain(generated_terms())
        .collect();
    for (name, t) in &all {
        let (_, cv) = run_cost(t, DEFAULT_STEP_LIMIT).map_err(|e| format!("{name}: {e}"))?;
        let bv = run_beh(t, DEFAULT_STEP_LIMIT).map_err(|e| format!("{name}: {e}"))?;
        if erase(&cv) != bv {
            return Err(format!("{name}: square does not commute"));
        }
    }
    Ok(format!("{} programs, 0 failures", all.len()))
}

/// 3. Law schemas, plus the phase-guarded step law.
fn law_suite() -> Criterion {
    let config = LawConfig {
        count: LAW_INSTANCES,
        ..LawConfig::default()
    };
    let report = run_laws::<NatCost>(&config);
    let schemas = &Schema::ALL[..LAW_SCHEMAS];
    let mut checked = 0;
    for s in schemas.iter().chain([Schema::StepBeh].iter()) {
        let row = report.row(*s);
        if row.instances != LAW_INSTANCES || row.failures != 0 || row.undecided != 0 {
            return Err(format!("{s}: {row:?}"));
        }
        checked += row.instances;
    }
    Ok(format!("{LAW_SCHEMAS} schemas x {LAW_INSTANCES} + step-beh x {LAW_INSTANCES}: {checked} instances, 0 failures"))
}

/// 4. The behavioral run returns the cost run's value and reports no cost.
fn phase_soundness() -> Criterion {
    let files = calf_files(&corpus_dir());
    for f in &files {
        let path = f.to_str().unwrap();
        let cost = json(&calf(&["run", "--phase", "cost", path]));
        let beh = json(&calf(&["run", "--phase", "beh", path]));
        if beh.get("cost").is_some() {
            return Err(format!("{path}: behavioral run reports a cost"));
        }
        if cost["value"].is_null() || cost["value"] != beh["value"] {
            return Err(format!("{path}: {cost} vs {beh}"));
        }
    }
    Ok(format!("{} programs, 0 failures", files.len()))
}

/// Reference interpreter by substitution, independent of the evaluator. It
/// covers the fragment the count family uses and combines costs with `plus`.
fn oracle(t: &NatTerm, plus: &dyn Fn(u64, u64) -> u64) -> (u64, NatTerm) {
    match t {
        Term::Ret(v) => (0, (**v).clone()),
        Term::Step(c, e) => {
            let (k, v) = oracle(e, plus);
            (plus(literal(c), k), v)
        }
        Term::Bind(e, f) => {
            let (k1, v) = oracle(e, plus);
            let (k2, w) = oracle(&f.subst(&v), plus);
            (plus(k1, k2), w)
        }
        Term::Ind {
            scrutinee,
            motive,
            zero,
            suc,
        } => match &**scrutinee {
            Term::Zero => oracle(zero, plus),
            Term::Suc(n) => {
                let rec = Term::Ind {
                    scrutinee: n.clone(),
                    motive: motive.clone(),
                    zero: zero.clone(),
                    suc: suc.clone(),
                };
                oracle(&suc.subst2(n, &rec), plus)
            }
            other => panic!("oracle: stuck scrutinee {other:?}"),
        },
        other => panic!("oracle: outside the fragment: {other:?}"),
    }
}

fn literal(c: &CostExpr<NatCost>) -> u64 {
    match c {
        CostExpr::Lit(n) => n.0,
        CostExpr::Zero => 0,
        CostExpr::Add(a, b) => literal(a) + literal(b),
    }
}

fn count_program(n: u64) -> String {
    format!(
        "ind {n} at k. F nat {{ zero => ret 0 | suc m, r => step{{1}} bind y <- r; ret (suc y) }}"
    )
}

/// 5. Costs of the unit-per-successor family agree with the reference interpreter.
fn derived_costs() -> Criterion {
    let dir = std::env::temp_dir().join(format!("calf-acceptance-{}", std::process::id()));
    fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let models: [(&str, &Plus); 2] = [("nat", &|a, b| a + b), ("nat-max", &|a, b| a.max(b))];
    let mut rows = Vec::new();
    for (model, plus) in models {
        let mut costs = Vec::new();
        for n in COUNT_INPUTS {
            let src = count_program(n);
            let term = parse_term::<NatCost>(&src).map_err(|e| format!("{e:?}"))?;
            let (expected, value) = oracle(&term, plus);
            if as_numeral(&value) != Some(n) {
                return Err(format!("oracle value for n={n}"));
            }
            if model == "nat" && expected != n {
                return Err(format!("oracle cost {expected} for n={n}"));
            }
            let path = dir.join(format!("count_{n}.calf"));
            fs::write(&path, format!("main : F nat = {src}\n")).map_err(|e| e.to_string())?;
            let out = json(&calf(&[
                "run",
                "--cost-model",
                model,
                path.to_str().unwrap(),
            ]));
            if out["cost"] != Value::String(expected.to_string()) {
                return Err(format!(
                    "{model} n={n}: calf {} vs oracle {expected}",
                    out["cost"]
                ));
            }
            costs.push(expected.to_string());
        }
        rows.push(format!("{model} [{}]", costs.join(",")));
    }
    Ok(format!("n in 0..=8 exact: {}", rows.join("; ")))
}

/// 6. Ill-typed files exit 1 with a diagnostic pointing into the file.
fn checker_robustness() -> Criterion {
    let files = calf_files(&corpus_dir().join("reject"));
    if files.len() != REJECT_FILES {
        return Err(format!("{} reject files", files.len()));
    }
    for f in &files {
        let out = calf(&["check", f.to_str().unwrap()]);
        let err = String::from_utf8_lossy(&out.stderr);
        let located = err
            .lines()
            .next()
            .and_then(|l| l.strip_prefix(&format!("{}:", f.display())))
            .is_some_and(|rest| rest.split(':').take(2).all(|n| n.parse::<usize>().is_ok()));
        if out.status.code() != Some(1) || !located || !err.contains('^') {
            return Err(format!(
                "{}: exit {:?}, stderr {err:?}",
                f.display(),
                out.status.code()
            ));
        }
    }
    Ok(format!(
        "{} files, all exit 1 with line:col spans",
        files.len()
    ))
}

/// 7. Repeated law runs print identical bytes.
fn determinism() -> Criterion {
    let args = ["laws", "--seed", "42", "--count", "200"];
    let a = calf(&args);
    let b = calf(&args);
    if a.status.code() != Some(0) {
        return Err(String::from_utf8_lossy(&a.stdout).into_owned());
    }
    if a.stdout != b.stdout {
        return Err("outputs differ".into());
    }
    Ok(format!("{} identical bytes", a.stdout.len()))
}

fn main() {
    let criteria: [Named; 7] = [
        ("canonicity suite", canonicity),
        ("erasure square", erasure_square),
        ("law suite", law_suite),
        ("phase soundness", phase_soundness),
        ("derived cost check", derived_costs),
        ("checker robustness", checker_robustness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
