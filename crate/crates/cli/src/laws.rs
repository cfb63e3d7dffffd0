//! The law suite behind `calf laws`.
//!
//! Each schema draws random closed instances `lhs = rhs` from the term
//! generator. An instance passes when both sides typecheck, the rewriter
//! proves them equal, and the cost-world evaluator gives both the same cost
//! and value. Three generated-term properties ride along: the phase-guarded
//! `step` law, the erasure square, and canonicity.
//!
//! Instances are independent, so they run on the rayon pool; results are
//! collected in input order and the report is byte-for-byte reproducible.

use std::fmt::{self, Write as _};

use calf_core::check::check_closed;
use calf_core::eval::{
    canonize, erase, readback_beh, readback_cost, run_beh, run_cost, DEFAULT_STEP_LIMIT,
};
use calf_core::gen::{gen_term, GTy, Generator, Scope, Target};
use calf_core::pretty;
use calf_core::rewrite::{prove_equal, Mutation, RewriteConfig, Verdict};
use calf_core::syntax::{alpha_eq, CompType, Term, ValType};
use calf_core::CostMonoid;
use rand::Rng;
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Schema {
    BindBeta,
    BindEta,
    BindAssoc,
    StepZero,
    StepPlus,
    ApStep,
    BindStep,
    Ind,
    StepBeh,
    Erasure,
    Canonicity,
}

impl Schema {
    pub const ALL: [Schema; 11] = [
        Schema::BindBeta,
        Schema::BindEta,
        Schema::BindAssoc,
        Schema::StepZero,
        Schema::StepPlus,
        Schema::ApStep,
        Schema::BindStep,
        Schema::Ind,
        Schema::StepBeh,
        Schema::Erasure,
        Schema::Canonicity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Schema::BindBeta => "bind-beta",
            Schema::BindEta => "bind-eta",
            Schema::BindAssoc => "bind-assoc",
            Schema::StepZero => "step-zero",
            Schema::StepPlus => "step-plus",
            Schema::ApStep => "ap-step",
            Schema::BindStep => "bind-step",
            Schema::Ind => "ind",
            Schema::StepBeh => "step-beh",
            Schema::Erasure => "erasure",
            Schema::Canonicity => "canonicity",
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct LawConfig {
    pub seed: u64,
    pub count: usize,
    pub size: usize,
    pub mutation: Option<Mutation>,
}

impl Default for LawConfig {
    fn default() -> Self {
        LawConfig {
            seed: 0,
            count: 200,
            size: 20,
            mutation: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// Allowed only for canonicity, where fuel may run out.
    Undecided,
    Fail(String),
}

#[derive(Clone, Debug)]
pub struct InstanceResult {
    pub schema: Schema,
    pub index: usize,
    pub seed: u64,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Row {
    pub instances: usize,
    pub failures: usize,
    pub undecided: usize,
}

#[derive(Clone, Debug)]
pub struct LawReport {
    pub results: Vec<InstanceResult>,
}

impl LawReport {
    pub fn row(&self, schema: Schema) -> Row {
        let mut row = Row::default();
        for r in self.results.iter().filter(|r| r.schema == schema) {
            row.instances += 1;
            match r.outcome {
                Outcome::Pass => {}
                Outcome::Undecided => row.undecided += 1,
                Outcome::Fail(_) => row.failures += 1,
            }
        }
        row
    }

    pub fn failures(&self) -> usize {
        self.results
            .iter()
            .filter(|r| matches!(r.outcome, Outcome::Fail(_)))
            .count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    /// Failure details followed by the summary table.
    pub fn render(&self, config: &LawConfig, model: &str) -> String {
        let mut out = String::new();
        for r in &self.results {
            if let Outcome::Fail(why) = &r.outcome {
                let _ = writeln!(
                    out,
                    "FAIL {} #{} (seed {}, instance seed {:#018x}): {}",
                    r.schema, r.index, config.seed, r.seed, why
                );
            }
        }
        let _ = writeln!(
            out,
            "laws: seed {} count {} size {} cost-model {}{}",
            config.seed,
            config.count,
            config.size,
            model,
            config
                .mutation
                .map(|m| format!(" mutation {}", m.name()))
                .unwrap_or_default()
        );
        let _ = writeln!(
            out,
            "{:<12} {:>9} {:>9} {:>9}",
            "schema", "instances", "failures", "undecided"
        );
        let mut total = Row::default();
        for schema in Schema::ALL {
            let row = self.row(schema);
            let _ = writeln!(
                out,
                "{:<12} {:>9} {:>9} {:>9}",
                schema.name(),
                row.instances,
                row.failures,
                row.undecided
            );
            total.instances += row.instances;
            total.failures += row.failures;
            total.undecided += row.undecided;
        }
        let _ = writeln!(
            out,
            "{:<12} {:>9} {:>9} {:>9}",
            "total", total.instances, total.failures, total.undecided
        );
        let _ = writeln!(out, "{}", if self.passed() { "ok" } else { "FAILED" });
        out
    }
}

fn instance_seed(seed: u64, schema: usize, index: usize) -> u64 {
    // splitmix64 finalizer over a mixed key
    let mut z = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((schema as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9))
        .wrapping_add((index as u64).wrapping_mul(0x94D0_49BB_1331_11EB));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_laws<C: CostMonoid>(config: &LawConfig) -> LawReport {
    let jobs: Vec<(usize, Schema, usize)> = Schema::ALL
        .iter()
        .enumerate()
        .flat_map(|(k, s)| (0..config.count).map(move |i| (k, *s, i)))
        .collect();
    let results = jobs
        .into_par_iter()
        .map(|(k, schema, index)| {
            let seed = instance_seed(config.seed, k, index);
            InstanceResult {
                schema,
                index,
                seed,
                outcome: run_instance::<C>(schema, seed, config),
            }
        })
        .collect();
    LawReport { results }
}

/// A first-order value type, so that results can be read back and compared.
fn ground_type<C: CostMonoid>(g: &mut Generator<C>) -> GTy {
    loop {
        let ty = g.small_type(1);
        if is_first_order(&ty) {
            return ty;
        }
    }
}

fn is_first_order(ty: &GTy) -> bool {
    match ty {
        GTy::F(_) | GTy::Pi(..) => false,
        GTy::Pair(a, b) => is_first_order(a) && is_first_order(b),
        _ => true,
    }
}

/// Redraws the type until the generator can produce an inferable term of it.
fn inferable_of<C: CostMonoid>(
    g: &mut Generator<C>,
    scope: &Scope,
    size: usize,
    pick: impl Fn(&mut Generator<C>) -> GTy,
) -> (GTy, Term<C>) {
    loop {
        let ty = pick(g);
        if let Some(t) = g.inferable(&ty, size, scope) {
            return (ty, t);
        }
    }
}

fn returned(ty: GTy) -> GTy {
    match ty {
        GTy::F(a) => *a,
        other => other,
    }
}

fn nonzero_cost<C: CostMonoid>(g: &mut Generator<C>) -> C {
    loop {
        let c = g.cost();
        if !c.is_zero() {
            return c;
        }
    }
}

struct Instance<C: CostMonoid> {
    lhs: Term<C>,
    rhs: Term<C>,
    ty: ValType<C>,
}

fn build<C: CostMonoid>(schema: Schema, seed: u64, size: usize) -> Instance<C> {
    let mut g = Generator::<C>::new(seed);
    let sz = |g: &mut Generator<C>| g.rng().gen_range(1..=size.max(1));
    let f_nat = GTy::f(GTy::Nat);
    let nat_motive = CompType::f(ValType::Nat);
    match schema {
        Schema::BindBeta => {
            let n = sz(&mut g);
            let (a, v) = inferable_of(&mut g, &Scope::new(), n, |g| g.small_type(1));
            let n = sz(&mut g);
            let f = g.open(&f_nat, n, &Scope::new().with(a));
            Instance {
                lhs: Term::bind(Term::ret(v.clone()), f.clone()),
                rhs: f.subst(&v),
                ty: f_nat.to_val_type(),
            }
        }
        Schema::BindEta => {
            let n = sz(&mut g);
            let (a, e) = inferable_of(&mut g, &Scope::new(), n, |g| GTy::f(ground_type(g)));
            Instance {
                lhs: Term::bind(e.clone(), Term::ret(Term::Var(0))),
                rhs: e,
                ty: a.to_val_type(),
            }
        }
        Schema::BindAssoc => {
            let n = sz(&mut g);
            let (a, e) = inferable_of(&mut g, &Scope::new(), n, |g| GTy::f(g.small_type(1)));
            let n = sz(&mut g);
            let (b, f) = inferable_of(&mut g, &Scope::new().with(returned(a)), n, |g| {
                GTy::f(g.small_type(1))
            });
            let b = returned(b);
            let n = sz(&mut g);
            let h = g.open(&f_nat, n, &Scope::new().with(b));
            Instance {
                lhs: Term::bind(Term::bind(e.clone(), f.clone()), h.clone()),
                rhs: Term::bind(e, Term::bind(f, h.shift(1, 1))),
                ty: f_nat.to_val_type(),
            }
        }
        Schema::StepZero => {
            let a = GTy::f(ground_type(&mut g));
            let n = sz(&mut g);
            let e = g.closed(&a, n);
            Instance {
                lhs: Term::step(C::mzero(), e.clone()),
                rhs: e,
                ty: a.to_val_type(),
            }
        }
        Schema::StepPlus => {
            let a = GTy::f(ground_type(&mut g));
            let (c1, c2) = (g.cost(), g.cost());
            let n = sz(&mut g);
            let e = g.closed(&a, n);
            Instance {
                lhs: Term::step(c1.clone(), Term::step(c2.clone(), e.clone())),
                rhs: Term::step(c1.mplus(&c2), e),
                ty: a.to_val_type(),
            }
        }
        Schema::ApStep => {
            let c = g.cost();
            let n = sz(&mut g);
            let fun = GTy::pi(GTy::Nat, GTy::Nat);
            let f = match g.inferable(&fun, n, &Scope::new()) {
                Some(f) => f,
                None => g.closed(&fun, n),
            };
            let n = sz(&mut g);
            let v = g.closed(&GTy::Nat, n);
            Instance {
                lhs: Term::ap(Term::step(c.clone(), f.clone()), v.clone()),
                rhs: Term::step(c, Term::ap(f, v)),
                ty: f_nat.to_val_type(),
            }
        }
        Schema::BindStep => {
            let c = g.cost();
            let n = sz(&mut g);
            let (a, e) = inferable_of(&mut g, &Scope::new(), n, |g| GTy::f(g.small_type(1)));
            let n = sz(&mut g);
            let f = g.open(&f_nat, n, &Scope::new().with(returned(a)));
            Instance {
                lhs: Term::bind(Term::step(c.clone(), e.clone()), f.clone()),
                rhs: Term::step(c, Term::bind(e, f)),
                ty: f_nat.to_val_type(),
            }
        }
        Schema::Ind => {
            let n = sz(&mut g);
            let z = g.closed(&f_nat, n);
            let n = sz(&mut g);
            let s = g.open(&f_nat, n, &Scope::new().with(GTy::Nat).with(f_nat.clone()));
            let (lhs, rhs) = if g.rng().gen_bool(0.5) {
                (Term::ind(Term::Zero, nat_motive, z.clone(), s), z)
            } else {
                let n = sz(&mut g);
                let pred = g.closed(&GTy::Nat, n);
                let rec = Term::ind(pred.clone(), nat_motive.clone(), z.clone(), s.clone());
                (
                    Term::ind(Term::suc(pred.clone()), nat_motive, z, s.clone()),
                    s.subst2(&pred, &rec),
                )
            };
            Instance {
                lhs,
                rhs,
                ty: f_nat.to_val_type(),
            }
        }
        Schema::StepBeh => {
            let a = GTy::f(ground_type(&mut g));
            let c = nonzero_cost(&mut g);
            let n = sz(&mut g);
            let e = g.closed(&a, n);
            Instance {
                lhs: Term::step(c, e.clone()),
                rhs: e,
                ty: a.to_val_type(),
            }
        }
        Schema::Erasure | Schema::Canonicity => {
            let t = gen_term(seed, size, Target::FNat);
            Instance {
                lhs: t.clone(),
                rhs: t,
                ty: f_nat.to_val_type(),
            }
        }
    }
}

fn show<C: CostMonoid>(t: &Term<C>) -> String {
    pretty::term(t)
}

fn run_instance<C: CostMonoid>(schema: Schema, seed: u64, config: &LawConfig) -> Outcome {
    let inst = build::<C>(schema, seed, config.size);
    let rw = RewriteConfig {
        mutation: config.mutation,
        ..RewriteConfig::default()
    };
    let describe = |why: &str| {
        format!(
            "{why}\n    lhs = {}\n    rhs = {}",
            show(&inst.lhs),
            show(&inst.rhs)
        )
    };

    for side in [&inst.lhs, &inst.rhs] {
        if let Err(e) = check_closed(side, &inst.ty, &RewriteConfig::default()) {
            return Outcome::Fail(describe(&format!("ill-typed instance: {e}")));
        }
    }

    match schema {
        Schema::Erasure => {
            return match (
                run_cost(&inst.lhs, DEFAULT_STEP_LIMIT),
                run_beh(&inst.lhs, DEFAULT_STEP_LIMIT),
            ) {
                (Ok((_, cv)), Ok(bv)) if erase(&cv) == bv => Outcome::Pass,
                (Ok(_), Ok(_)) => Outcome::Fail(describe(
                    "erased cost-world value differs from behavioral value",
                )),
                (Err(e), _) | (_, Err(e)) => {
                    Outcome::Fail(describe(&format!("evaluation failed: {e}")))
                }
            };
        }
        Schema::Canonicity => {
            let canon = match canonize(&inst.lhs, DEFAULT_STEP_LIMIT) {
                Ok(c) => c,
                Err(e) => return Outcome::Fail(describe(&format!("canonize failed: {e}"))),
            };
            return match prove_equal(&inst.lhs, &canon.witness, false, &rw) {
                Verdict::Equal(_) => Outcome::Pass,
                Verdict::Undecided { .. } => Outcome::Undecided,
                Verdict::Distinct { lhs, rhs } => Outcome::Fail(describe(&format!(
                    "witness {} refuted: normal forms {} and {}",
                    show(&canon.witness),
                    show(&lhs),
                    show(&rhs)
                ))),
            };
        }
        Schema::StepBeh => {
            match prove_equal(&inst.lhs, &inst.rhs, true, &rw) {
                Verdict::Equal(_) => {}
                v => return Outcome::Fail(describe(&format!("under the phase: {}", v.label()))),
            }
            // Without the phase the sides differ exactly when their costs do;
            // an idempotent monoid can absorb the extra step.
            let costs = match (
                run_cost(&inst.lhs, DEFAULT_STEP_LIMIT),
                run_cost(&inst.rhs, DEFAULT_STEP_LIMIT),
            ) {
                (Ok(l), Ok(r)) => (l.0, r.0),
                (Err(e), _) | (_, Err(e)) => {
                    return Outcome::Fail(describe(&format!("evaluation failed: {e}")))
                }
            };
            let unphased = prove_equal(&inst.lhs, &inst.rhs, false, &rw);
            if costs.0 != costs.1 && unphased.is_equal() {
                return Outcome::Fail(describe(&format!(
                    "rewrote to equal without the phase although costs {} and {} differ",
                    costs.0.render(),
                    costs.1.render()
                )));
            }
            if costs.0 == costs.1 && !unphased.is_equal() {
                return Outcome::Fail(describe(&format!(
                    "equal costs but {} without the phase",
                    unphased.label()
                )));
            }
            return match (
                run_beh(&inst.lhs, DEFAULT_STEP_LIMIT),
                run_beh(&inst.rhs, DEFAULT_STEP_LIMIT),
            ) {
                (Ok(a), Ok(b))
                    if readback_beh(&a).is_some() && readback_beh(&a) == readback_beh(&b) =>
                {
                    Outcome::Pass
                }
                (Ok(_), Ok(_)) => Outcome::Fail(describe("behavioral values differ")),
                (Err(e), _) | (_, Err(e)) => {
                    Outcome::Fail(describe(&format!("evaluation failed: {e}")))
                }
            };
        }
        _ => {}
    }

    match prove_equal(&inst.lhs, &inst.rhs, false, &rw) {
        Verdict::Equal(_) => {}
        Verdict::Undecided { reason } => {
            return Outcome::Fail(describe(&format!("undecided: {reason}")))
        }
        Verdict::Distinct { lhs, rhs } => {
            return Outcome::Fail(describe(&format!(
                "distinct normal forms {} and {}",
                show(&lhs),
                show(&rhs)
            )))
        }
    }
    let (l, r) = match (
        run_cost(&inst.lhs, DEFAULT_STEP_LIMIT),
        run_cost(&inst.rhs, DEFAULT_STEP_LIMIT),
    ) {
        (Ok(l), Ok(r)) => (l, r),
        (Err(e), _) | (_, Err(e)) => {
            return Outcome::Fail(describe(&format!("evaluation failed: {e}")))
        }
    };
    let (lv, rv) = (readback_cost(&l.1), readback_cost(&r.1));
    let same_value = match (&lv, &rv) {
        (Some(a), Some(b)) => alpha_eq(a, b),
        _ => false,
    };
    if l.0 != r.0 || !same_value {
        return Outcome::Fail(describe(&format!(
            "evaluator disagrees: cost {} vs {}",
            l.0.render(),
            r.0.render()
        )));
    }
    Outcome::Pass
}
