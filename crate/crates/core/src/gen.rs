//! Random well-typed term generation.
//!
//! Terms are generated against a small universe of types ([`GTy`]) and in
//! one of two modes mirroring the checker: a term generated in
//! [`Mode::Infer`] will have its type synthesized, so it must not be a bare
//! lambda, `refl` or `*`. Each generator call receives a node budget and
//! never exceeds it; the minimum size of every (type, mode) pair is known,
//! so budgets are split so each child can always be completed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::CostMonoid;
use crate::syntax::{numeral, CompType, Constructor, Term, ValType};

/// Generator type universe. `F` and `Pi` denote the value types `U (F A)`
/// and `U (Pi (x : A) F B)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GTy {
    Nat,
    Pair(Box<GTy>, Box<GTy>),
    ClNat,
    OpNat,
    /// `eq (nat, n, n)` for a numeral `n`.
    EqNat(u64),
    F(Box<GTy>),
    Pi(Box<GTy>, Box<GTy>),
}

impl GTy {
    pub fn f(a: GTy) -> GTy {
        GTy::F(Box::new(a))
    }

    pub fn pi(a: GTy, b: GTy) -> GTy {
        GTy::Pi(Box::new(a), Box::new(b))
    }

    pub fn pair(a: GTy, b: GTy) -> GTy {
        GTy::Pair(Box::new(a), Box::new(b))
    }

    pub fn to_val_type<C: CostMonoid>(&self) -> ValType<C> {
        match self {
            GTy::Nat => ValType::Nat,
            GTy::Pair(a, b) => ValType::sig(a.to_val_type(), b.to_val_type()),
            GTy::ClNat => ValType::cl(ValType::Nat),
            GTy::OpNat => ValType::op(ValType::Nat),
            GTy::EqNat(n) => ValType::eq(ValType::Nat, numeral(*n), numeral(*n)),
            GTy::F(a) => ValType::comp_f(a.to_val_type()),
            GTy::Pi(a, b) => {
                ValType::u(CompType::pi(a.to_val_type(), CompType::f(b.to_val_type())))
            }
        }
    }

    /// Motive for an eliminator returning a computation of this type.
    fn motive<C: CostMonoid>(&self) -> CompType<C> {
        match self.to_val_type::<C>() {
            ValType::U(x) => *x,
            _ => unreachable!("motives are computation types"),
        }
    }

    fn is_comp(&self) -> bool {
        matches!(self, GTy::F(_) | GTy::Pi(..))
    }
}

/// Top-level targets accepted by [`gen_term`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    /// `F nat`
    FNat,
    /// `Pi (x : nat) F nat`
    PiNat,
    /// `nat`
    Nat,
}

impl Target {
    pub fn gty(self) -> GTy {
        match self {
            Target::FNat => GTy::f(GTy::Nat),
            Target::PiNat => GTy::pi(GTy::Nat, GTy::Nat),
            Target::Nat => GTy::Nat,
        }
    }

    pub fn val_type<C: CostMonoid>(self) -> ValType<C> {
        self.gty().to_val_type()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Check,
    Infer,
}

#[derive(Clone, Debug, Default)]
pub struct Scope {
    /// Variable types, innermost last.
    vars: Vec<GTy>,
    phase: bool,
}

impl Scope {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(&self, ty: GTy) -> Scope {
        let mut next = self.clone();
        next.vars.push(ty);
        next
    }

    fn phased(&self) -> Scope {
        Scope {
            vars: self.vars.clone(),
            phase: true,
        }
    }

    fn vars_of(&self, ty: &GTy) -> Vec<usize> {
        self.vars
            .iter()
            .rev()
            .enumerate()
            .filter(|(_, t)| *t == ty)
            .map(|(i, _)| i)
            .collect()
    }
}

const INF: usize = usize::MAX / 8;

fn add(parts: &[usize]) -> usize {
    parts
        .iter()
        .fold(0usize, |a, b| a.saturating_add(*b))
        .min(INF)
}

/// Smallest term of `ty` generable in `mode`, ignoring variables.
fn min_size(ty: &GTy, mode: Mode) -> usize {
    match (ty, mode) {
        (GTy::Nat, _) => 1,
        (GTy::Pair(a, b), m) => add(&[1, min_size(a, m), min_size(b, m)]),
        (GTy::ClNat | GTy::OpNat, _) => 2,
        (GTy::EqNat(_), Mode::Check) => 1,
        (GTy::EqNat(_), Mode::Infer) => INF,
        (GTy::F(a), Mode::Check) => add(&[1, min_size(a, Mode::Check)]),
        (GTy::F(a), Mode::Infer) => {
            let ret = add(&[1, min_size(a, Mode::Infer)]);
            ret.min(ind_size(ty))
        }
        (GTy::Pi(_, b), Mode::Check) => add(&[2, min_size(b, Mode::Check)]),
        (GTy::Pi(..), Mode::Infer) => ind_size(ty),
    }
}

/// `ind 0 at _. X { zero => e | suc _, _ => e }` with `e` minimal.
fn ind_size(ty: &GTy) -> usize {
    let branch = min_size(ty, Mode::Check);
    add(&[2, branch, branch])
}

fn min_in(ty: &GTy, mode: Mode, scope: &Scope) -> usize {
    if scope.vars.contains(ty) {
        1
    } else {
        let base = min_size(ty, mode);
        if scope.phase && mode == Mode::Check && *ty == GTy::ClNat {
            1
        } else {
            base
        }
    }
}

/// Counts constructor occurrences, including terms inside motives.
pub fn coverage<C: CostMonoid>(terms: &[Term<C>]) -> BTreeMap<Constructor, usize> {
    let mut counts: BTreeMap<Constructor, usize> =
        Constructor::ALL.iter().map(|c| (*c, 0)).collect();
    for t in terms {
        t.for_each_node(&mut |n| *counts.entry(n.constructor()).or_insert(0) += 1);
    }
    counts
}

pub struct Generator<C> {
    rng: ChaCha8Rng,
    _marker: std::marker::PhantomData<C>,
}

fn mix(seed: u64, size: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (size as u64).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// A deterministic well-typed closed term of `target` with at most `size`
/// nodes. Sizes below the target's minimum are raised to it.
pub fn gen_term<C: CostMonoid>(seed: u64, size: usize, target: Target) -> Term<C> {
    Generator::<C>::new(mix(seed, size)).closed(&target.gty(), size)
}

type Former<'a, C> = Box<dyn FnOnce(&mut Generator<C>, usize) -> Term<C> + 'a>;

impl<C: CostMonoid> Generator<C> {
    pub fn new(seed: u64) -> Self {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            _marker: std::marker::PhantomData,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn cost(&mut self) -> C {
        C::sample(&mut self.rng)
    }

    /// A closed term of `ty` in check mode.
    pub fn closed(&mut self, ty: &GTy, size: usize) -> Term<C> {
        self.open(ty, size, &Scope::new())
    }

    /// A term of `ty` in check mode under `scope`.
    pub fn open(&mut self, ty: &GTy, size: usize, scope: &Scope) -> Term<C> {
        let size = size.max(min_in(ty, Mode::Check, scope));
        self.gen(ty, size, Mode::Check, scope)
    }

    /// A term of `ty` whose type the checker can infer, or `None` when no
    /// such term exists under `scope`.
    pub fn inferable(&mut self, ty: &GTy, size: usize, scope: &Scope) -> Option<Term<C>> {
        let min = min_in(ty, Mode::Infer, scope);
        (min < INF).then(|| self.gen(ty, size.max(min), Mode::Infer, scope))
    }

    /// A small value type; `depth` bounds nesting.
    pub fn small_type(&mut self, depth: usize) -> GTy {
        let roll = self.rng.gen_range(0..100);
        if depth == 0 || roll < 45 {
            return GTy::Nat;
        }
        match roll {
            45..=56 => GTy::ClNat,
            57..=64 => GTy::OpNat,
            65..=72 => GTy::EqNat(self.rng.gen_range(0..3)),
            73..=84 => GTy::pair(self.small_type(depth - 1), self.small_type(depth - 1)),
            85..=92 => GTy::f(self.small_type(depth - 1)),
            _ => GTy::pi(GTy::Nat, self.small_type(depth - 1)),
        }
    }

    /// Splits `extra` spare nodes randomly among `k` children.
    fn shares(&mut self, extra: usize, k: usize) -> Vec<usize> {
        if k == 0 {
            return Vec::new();
        }
        let mut cuts: Vec<usize> = (0..k - 1).map(|_| self.rng.gen_range(0..=extra)).collect();
        cuts.sort_unstable();
        let mut out = Vec::with_capacity(k);
        let mut last = 0;
        for c in cuts {
            out.push(c - last);
            last = c;
        }
        out.push(extra - last);
        out
    }

    /// Budgets for children with the given minimum sizes, sharing `total`.
    fn budgets(&mut self, total: usize, mins: &[usize]) -> Vec<usize> {
        let extra = total - add(mins);
        self.shares(extra, mins.len())
            .into_iter()
            .zip(mins)
            .map(|(s, m)| s + m)
            .collect()
    }

    fn gen(&mut self, ty: &GTy, budget: usize, mode: Mode, scope: &Scope) -> Term<C> {
        debug_assert!(
            budget >= min_in(ty, mode, scope),
            "{ty:?} {mode:?} {budget}"
        );
        let mut options: Vec<(u32, usize, Former<'_, C>)> = Vec::new();

        let vars = scope.vars_of(ty);
        if !vars.is_empty() {
            let pick = *vars.choose(&mut self.rng).expect("nonempty");
            options.push((4, 1, Box::new(move |_, _| Term::Var(pick))));
        }

        match ty {
            GTy::Nat => self.nat_formers(&mut options, mode, scope),
            GTy::Pair(a, b) => {
                let (a, b) = ((**a).clone(), (**b).clone());
                let mins = [min_in(&a, mode, scope), min_in(&b, mode, scope)];
                let s = scope.clone();
                options.push((
                    4,
                    add(&[1, mins[0], mins[1]]),
                    Box::new(move |g, n| {
                        let bs = g.budgets(n - 1, &mins);
                        Term::pair(g.gen(&a, bs[0], mode, &s), g.gen(&b, bs[1], mode, &s))
                    }),
                ));
            }
            GTy::ClNat => {
                let s = scope.clone();
                options.push((
                    4,
                    2,
                    Box::new(move |g, n| Term::seal(g.gen(&GTy::Nat, n - 1, mode, &s))),
                ));
                if scope.phase && mode == Mode::Check {
                    options.push((2, 1, Box::new(|_, _| Term::Star)));
                }
            }
            GTy::OpNat => {
                let s = scope.phased();
                options.push((
                    4,
                    2,
                    Box::new(move |g, n| Term::plam(g.gen(&GTy::Nat, n - 1, mode, &s))),
                ));
            }
            GTy::EqNat(_) => {
                if mode == Mode::Check {
                    options.push((4, 1, Box::new(|_, _| Term::Refl)));
                }
            }
            GTy::F(a) => self.comp_formers(&mut options, a, mode, scope),
            GTy::Pi(a, b) => self.fun_formers(&mut options, a, b, mode, scope),
        }

        if ty.is_comp() {
            self.eliminator_formers(&mut options, ty, scope);
        }

        let feasible: Vec<usize> = (0..options.len())
            .filter(|&i| options[i].1 <= budget)
            .collect();
        assert!(
            !feasible.is_empty(),
            "no former for {ty:?} in {mode:?} at budget {budget}"
        );
        // prefer structure while budget remains, leaves once it runs out
        let weights: Vec<u32> = feasible
            .iter()
            .map(|&i| {
                let (w, min, _) = &options[i];
                if budget >= 6 && *min <= 1 {
                    1
                } else {
                    *w
                }
            })
            .collect();
        let total: u32 = weights.iter().sum();
        let mut roll = self.rng.gen_range(0..total);
        let mut chosen = feasible[0];
        for (k, w) in weights.iter().enumerate() {
            if roll < *w {
                chosen = feasible[k];
                break;
            }
            roll -= w;
        }
        let (_, _, build) = options.swap_remove(chosen);
        build(self, budget)
    }

    fn nat_formers<'a>(
        &mut self,
        options: &mut Vec<(u32, usize, Former<'a, C>)>,
        mode: Mode,
        scope: &Scope,
    ) {
        options.push((2, 1, Box::new(|_, _| Term::Zero)));
        let s = scope.clone();
        options.push((
            4,
            2,
            Box::new(move |g, n| Term::suc(g.gen(&GTy::Nat, n - 1, mode, &s))),
        ));
        if scope.phase {
            let s = scope.clone();
            options.push((
                2,
                1 + min_in(&GTy::OpNat, Mode::Infer, scope),
                Box::new(move |g, n| Term::pap(g.gen(&GTy::OpNat, n - 1, Mode::Infer, &s))),
            ));
        }
    }

    fn comp_formers<'a>(
        &mut self,
        options: &mut Vec<(u32, usize, Former<'a, C>)>,
        a: &GTy,
        mode: Mode,
        scope: &Scope,
    ) {
        let ty = GTy::f(a.clone());
        // ret v
        {
            let a = a.clone();
            let s = scope.clone();
            options.push((
                3,
                add(&[1, min_in(&a, mode, scope)]),
                Box::new(move |g, n| Term::ret(g.gen(&a, n - 1, mode, &s))),
            ));
        }
        // step{c} e
        {
            let ty = ty.clone();
            let s = scope.clone();
            options.push((
                3,
                add(&[1, min_in(&ty, mode, scope)]),
                Box::new(move |g, n| {
                    let c = g.cost();
                    Term::step(c, g.gen(&ty, n - 1, mode, &s))
                }),
            ));
        }
        // bind x <- e; f
        {
            let bound = self.small_type(1);
            let e_ty = GTy::f(bound.clone());
            let inner = scope.with(bound);
            let mins = [min_in(&e_ty, Mode::Infer, scope), min_in(&ty, mode, &inner)];
            let ty = ty.clone();
            let s = scope.clone();
            options.push((
                4,
                add(&[1, mins[0], mins[1]]),
                Box::new(move |g, n| {
                    let bs = g.budgets(n - 1, &mins);
                    let e = g.gen(&e_ty, bs[0], Mode::Infer, &s);
                    Term::bind(e, g.gen(&ty, bs[1], mode, &inner))
                }),
            ));
        }
        // (\x. body) arg, optionally with a step around the lambda
        {
            let dom = self.small_type(1);
            let inner = scope.with(dom.clone());
            let mins = [
                min_in(&dom, Mode::Infer, scope),
                min_in(&ty, Mode::Infer, &inner),
            ];
            let ty = ty.clone();
            let s = scope.clone();
            options.push((
                3,
                add(&[2, mins[0], mins[1]]),
                Box::new(move |g, n| {
                    let stepped = n > add(&[3, mins[0], mins[1]]) && g.rng.gen_bool(0.4);
                    let overhead = if stepped { 3 } else { 2 };
                    let bs = g.budgets(n - overhead, &mins);
                    let arg = g.gen(&dom, bs[0], Mode::Infer, &s);
                    let body = g.gen(&ty, bs[1], Mode::Infer, &inner);
                    let lam = Term::lam(body);
                    let head = if stepped {
                        let c = g.cost();
                        Term::step(c, lam)
                    } else {
                        lam
                    };
                    Term::ap(head, arg)
                }),
            ));
        }
        // f arg with f synthesized
        {
            let dom = self.small_type(1);
            let fun = GTy::pi(dom.clone(), a.clone());
            let mins = [
                min_in(&fun, Mode::Infer, scope),
                min_in(&dom, Mode::Check, scope),
            ];
            let s = scope.clone();
            options.push((
                3,
                add(&[1, mins[0], mins[1]]),
                Box::new(move |g, n| {
                    let bs = g.budgets(n - 1, &mins);
                    let f = g.gen(&fun, bs[0], Mode::Infer, &s);
                    Term::ap(f, g.gen(&dom, bs[1], Mode::Check, &s))
                }),
            ));
        }
        // split p as (x, y) in body
        {
            let (l, r) = (self.small_type(0), self.small_type(1));
            let p_ty = GTy::pair(l.clone(), r.clone());
            let inner = scope.with(l).with(r);
            let mins = [min_in(&p_ty, Mode::Infer, scope), min_in(&ty, mode, &inner)];
            let ty = ty.clone();
            let s = scope.clone();
            options.push((
                2,
                add(&[1, mins[0], mins[1]]),
                Box::new(move |g, n| {
                    let bs = g.budgets(n - 1, &mins);
                    let p = g.gen(&p_ty, bs[0], Mode::Infer, &s);
                    Term::split(p, g.gen(&ty, bs[1], mode, &inner))
                }),
            ));
        }
        // unseal with a sealed result: seal branch seals anything, * branch returns *.
        // Without a sealed variable in scope, one is bound first from `ret (seal m)`.
        if *a == GTy::ClNat {
            let local = !scope.vars.contains(&GTy::ClNat);
            let inner = if local {
                scope.with(GTy::ClNat)
            } else {
                scope.clone()
            };
            let with_a = inner.with(GTy::Nat);
            let mins = [
                min_in(&GTy::ClNat, Mode::Infer, &inner),
                min_in(&GTy::Nat, Mode::Check, &with_a),
                if local {
                    min_in(&GTy::Nat, Mode::Check, scope)
                } else {
                    0
                },
            ];
            let fixed = if local { 8 } else { 5 };
            let s = scope.clone();
            options.push((
                8,
                add(&[fixed, mins[0], mins[1], mins[2]]),
                Box::new(move |g, n| {
                    let stepped =
                        n > add(&[fixed, mins[0], mins[1], mins[2]]) && g.rng.gen_bool(0.5);
                    let overhead = fixed + usize::from(stepped);
                    let bs = g.budgets(n - overhead, &mins);
                    let scrutinee = g.gen(&GTy::ClNat, bs[0], Mode::Infer, &inner);
                    let sealed =
                        Term::ret(Term::seal(g.gen(&GTy::Nat, bs[1], Mode::Check, &with_a)));
                    let eta = if stepped {
                        let c = g.cost();
                        Term::step(c, sealed)
                    } else {
                        sealed
                    };
                    let body = Term::unseal(
                        scrutinee,
                        GTy::f(GTy::ClNat).motive::<C>().shift(1, 0),
                        eta,
                        Term::ret(Term::Star),
                    );
                    if local {
                        let m = g.gen(&GTy::Nat, bs[2], Mode::Check, &s);
                        Term::bind(Term::ret(Term::seal(m)), body)
                    } else {
                        body
                    }
                }),
            ));
        }
    }

    fn fun_formers<'a>(
        &mut self,
        options: &mut Vec<(u32, usize, Former<'a, C>)>,
        dom: &GTy,
        cod: &GTy,
        mode: Mode,
        scope: &Scope,
    ) {
        let ty = GTy::pi(dom.clone(), cod.clone());
        if mode == Mode::Check {
            let inner = scope.with(dom.clone());
            let body_ty = GTy::f(cod.clone());
            let min = min_in(&body_ty, Mode::Check, &inner);
            options.push((
                5,
                add(&[1, min]),
                Box::new(move |g, n| Term::lam(g.gen(&body_ty, n - 1, Mode::Check, &inner))),
            ));
        }
        let s = scope.clone();
        let min = min_in(&ty, mode, scope);
        options.push((
            1,
            add(&[1, min]),
            Box::new(move |g, n| {
                let c = g.cost();
                Term::step(c, g.gen(&ty, n - 1, mode, &s))
            }),
        ));
    }

    /// `ind` and `unseal` returning a computation of `ty`; both synthesize
    /// their type from the motive, so they serve either mode.
    fn eliminator_formers<'a>(
        &mut self,
        options: &mut Vec<(u32, usize, Former<'a, C>)>,
        ty: &GTy,
        scope: &Scope,
    ) {
        {
            let with_rec = scope.with(GTy::Nat).with(ty.clone());
            let mins = [
                min_in(&GTy::Nat, Mode::Check, scope),
                min_in(ty, Mode::Check, scope),
                min_in(ty, Mode::Check, &with_rec),
            ];
            let ty = ty.clone();
            let s = scope.clone();
            options.push((
                3,
                add(&[1, mins[0], mins[1], mins[2]]),
                Box::new(move |g, n| {
                    let bs = g.budgets(n - 1, &mins);
                    let scrutinee = g.gen(&GTy::Nat, bs[0], Mode::Check, &s);
                    let zero = g.gen(&ty, bs[1], Mode::Check, &s);
                    let suc = g.gen(&ty, bs[2], Mode::Check, &with_rec);
                    Term::ind(scrutinee, ty.motive::<C>().shift(1, 0), zero, suc)
                }),
            ));
        }
        {
            // the * branch is a phase-free term, the seal branch the same
            // term weakened and possibly charged
            let mins = [
                min_in(&GTy::ClNat, Mode::Infer, scope),
                min_in(ty, Mode::Check, scope),
            ];
            let ty = ty.clone();
            let s = scope.clone();
            options.push((
                2,
                add(&[1, mins[0], mins[1], mins[1]]),
                Box::new(move |g, n| {
                    let spare = n - 1 - mins[0] - 2 * mins[1];
                    let charge = spare >= 1 && g.rng.gen_bool(0.5);
                    let spare = spare - usize::from(charge);
                    let shares = g.shares(spare, 2);
                    let scrutinee = g.gen(&GTy::ClNat, mins[0] + shares[0], Mode::Infer, &s);
                    let star = g.gen(&ty, mins[1] + shares[1] / 2, Mode::Check, &s);
                    let weakened = star.shift(1, 0);
                    let eta = if charge {
                        let c = g.cost();
                        Term::step(c, weakened)
                    } else {
                        weakened
                    };
                    Term::unseal(scrutinee, ty.motive::<C>().shift(1, 0), eta, star)
                }),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::check::check_closed;
    use crate::cost::NatAdd;
    use crate::rewrite::RewriteConfig;

    #[test]
    fn generated_terms_typecheck_and_respect_size() {
        let cfg = RewriteConfig::default();
        for target in [Target::FNat, Target::PiNat, Target::Nat] {
            let ty = target.val_type::<NatAdd>();
            for seed in 0..150u64 {
                let size = 1 + (seed as usize % 40);
                let t: Term<NatAdd> = gen_term(seed, size, target);
                let min = min_size(&target.gty(), Mode::Check);
                assert!(
                    t.size() <= size.max(min),
                    "{target:?} seed {seed}: {} > {size}",
                    t.size()
                );
                if let Err(e) = check_closed(&t, &ty, &cfg) {
                    panic!(
                        "{target:?} seed {seed} size {size}: {e}\n{}",
                        crate::pretty::term(&t)
                    );
                }
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        for seed in 0..20 {
            let a: Term<NatAdd> = gen_term(seed, 25, Target::FNat);
            let b: Term<NatAdd> = gen_term(seed, 25, Target::FNat);
            assert_eq!(a, b);
        }
        let a: Term<NatAdd> = gen_term(1, 25, Target::FNat);
        let b: Term<NatAdd> = gen_term(2, 25, Target::FNat);
        assert_ne!(a, b);
    }

    #[test]
    fn min_sizes() {
        assert_eq!(min_size(&GTy::f(GTy::Nat), Mode::Check), 2);
        assert_eq!(min_size(&GTy::pi(GTy::Nat, GTy::Nat), Mode::Check), 3);
        assert_eq!(min_size(&GTy::EqNat(1), Mode::Infer), INF);
        assert_eq!(min_size(&GTy::f(GTy::EqNat(1)), Mode::Infer), 6);
    }
}
