//! Kernel syntax: terms, value types and computation types.
//!
//! Variables are de Bruijn indices. Term binders (`Bind`, `Lam`, `Split`,
//! the branches of `Ind`/`UnsealInd`, and the binders of `Sig`, `Pi` and
//! motives) each occupy one index. Phase binders (`PLam` bodies and the star
//! branch of `UnsealInd`) occupy none: the behavioral phase is a proposition
//! and no term refers to its evidence.
//!
//! There are no thunk/force constructors. A computation of type `X` is a
//! value of type `U X`; polarity is tracked by the checker.

use std::fmt;

use crate::cost::CostMonoid;

/// A cost annotation; normalizes to a single monoid element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CostExpr<C> {
    Lit(C),
    Add(Box<CostExpr<C>>, Box<CostExpr<C>>),
    Zero,
}

impl<C: CostMonoid> CostExpr<C> {
    pub fn lit(c: C) -> Self {
        CostExpr::Lit(c)
    }

    pub fn sum(a: CostExpr<C>, b: CostExpr<C>) -> Self {
        CostExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn normalize(&self) -> C {
        match self {
            CostExpr::Lit(c) => c.clone(),
            CostExpr::Add(a, b) => a.normalize().mplus(&b.normalize()),
            CostExpr::Zero => C::mzero(),
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, CostExpr::Lit(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term<C> {
    Var(usize),
    Zero,
    Suc(Box<Term<C>>),
    Ret(Box<Term<C>>),
    /// `bind x <- e; body`; `body` binds one variable.
    Bind(Box<Term<C>>, Box<Term<C>>),
    Step(CostExpr<C>, Box<Term<C>>),
    Lam(Box<Term<C>>),
    Ap(Box<Term<C>>, Box<Term<C>>),
    Pair(Box<Term<C>>, Box<Term<C>>),
    /// `split p as (x, y) in body`; `body` binds two variables, `y` innermost.
    Split(Box<Term<C>>, Box<Term<C>>),
    Refl,
    Seal(Box<Term<C>>),
    Star,
    UnsealInd {
        scrutinee: Box<Term<C>>,
        /// Binds the scrutinee (of type `Cl A`).
        motive: Box<CompType<C>>,
        /// Binds `a : A`.
        eta: Box<Term<C>>,
        /// Checked under a phase assumption; binds no index.
        star: Box<Term<C>>,
    },
    PLam(Box<Term<C>>),
    PAp(Box<Term<C>>),
    Ind {
        scrutinee: Box<Term<C>>,
        /// Binds the scrutinee (of type `nat`).
        motive: Box<CompType<C>>,
        zero: Box<Term<C>>,
        /// Binds the predecessor (index 1) and the recursive result (index 0).
        suc: Box<Term<C>>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValType<C> {
    Nat,
    U(Box<CompType<C>>),
    /// The second component binds one variable.
    Sig(Box<ValType<C>>, Box<ValType<C>>),
    Eq(Box<ValType<C>>, Box<Term<C>>, Box<Term<C>>),
    Op(Box<ValType<C>>),
    Cl(Box<ValType<C>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompType<C> {
    F(Box<ValType<C>>),
    /// The codomain binds one variable.
    Pi(Box<ValType<C>>, Box<CompType<C>>),
}

/// A typing context entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Entry<C> {
    /// A term variable with its type and, for top-level definitions, its value.
    /// Both live in the scope of the entries before it.
    TermVar {
        ty: ValType<C>,
        value: Option<Term<C>>,
    },
    PhaseAssumption,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context<C> {
    entries: Vec<Entry<C>>,
}

impl<C> Default for Context<C> {
    fn default() -> Self {
        Context {
            entries: Vec::new(),
        }
    }
}

impl<C: CostMonoid> Context<C> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[Entry<C>] {
        &self.entries
    }

    pub fn with_var(&self, ty: ValType<C>) -> Self {
        let mut next = self.clone();
        next.entries.push(Entry::TermVar { ty, value: None });
        next
    }

    pub fn with_def(&self, ty: ValType<C>, value: Term<C>) -> Self {
        let mut next = self.clone();
        next.entries.push(Entry::TermVar {
            ty,
            value: Some(value),
        });
        next
    }

    pub fn with_phase(&self) -> Self {
        let mut next = self.clone();
        next.entries.push(Entry::PhaseAssumption);
        next
    }

    pub fn has_phase(&self) -> bool {
        self.entries
            .iter()
            .any(|e| matches!(e, Entry::PhaseAssumption))
    }

    /// Number of term variables in scope.
    pub fn len(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| matches!(e, Entry::TermVar { .. }))
            .count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The type of `Var(index)`, weakened into the full context.
    pub fn lookup(&self, index: usize) -> Option<ValType<C>> {
        self.term_vars()
            .nth(index)
            .map(|(ty, _)| ty.shift(index + 1, 0))
    }

    fn term_vars(&self) -> impl Iterator<Item = (&ValType<C>, Option<&Term<C>>)> {
        self.entries.iter().rev().filter_map(|e| match e {
            Entry::TermVar { ty, value } => Some((ty, value.as_ref())),
            Entry::PhaseAssumption => None,
        })
    }

    /// Replaces every variable that names a definition by its value.
    pub fn unfold(&self, term: &Term<C>) -> Term<C> {
        if !self.term_vars().any(|(_, v)| v.is_some()) {
            return term.clone();
        }
        let values: Vec<Option<Term<C>>> = self
            .term_vars()
            .enumerate()
            .map(|(i, (_, v))| v.map(|v| self.unfold_from(v, i + 1).shift(i + 1, 0)))
            .collect();
        term.substitute(&|i| match values.get(i) {
            Some(Some(v)) => v.clone(),
            _ => Term::Var(i),
        })
    }

    pub fn unfold_type(&self, ty: &ValType<C>) -> ValType<C> {
        if !self.term_vars().any(|(_, v)| v.is_some()) {
            return ty.clone();
        }
        let values: Vec<Option<Term<C>>> = self
            .term_vars()
            .enumerate()
            .map(|(i, (_, v))| v.map(|v| self.unfold_from(v, i + 1).shift(i + 1, 0)))
            .collect();
        ty.substitute(&|i| match values.get(i) {
            Some(Some(v)) => v.clone(),
            _ => Term::Var(i),
        })
    }

    /// Unfolds a definition body stored `skip` term variables from the end.
    fn unfold_from(&self, body: &Term<C>, skip: usize) -> Term<C> {
        let mut outer = self.clone();
        let mut dropped = 0;
        while dropped < skip {
            if let Some(Entry::TermVar { .. }) = outer.entries.pop() {
                dropped += 1;
            }
        }
        outer.unfold(body)
    }
}

/// `suc^n zero`.
pub fn numeral<C>(n: u64) -> Term<C> {
    let mut t = Term::Zero;
    for _ in 0..n {
        t = Term::Suc(Box::new(t));
    }
    t
}

/// Reads `suc^n zero` back to `n`.
pub fn as_numeral<C>(t: &Term<C>) -> Option<u64> {
    let mut n = 0u64;
    let mut cur = t;
    loop {
        match cur {
            Term::Zero => return Some(n),
            Term::Suc(inner) => {
                n += 1;
                cur = inner;
            }
            _ => return None,
        }
    }
}

/// A variable handler for [`Term::traverse`]: receives the index and the
/// number of binders crossed so far.
type VarFn<'a, C> = &'a dyn Fn(usize, usize) -> Term<C>;

impl<C: CostMonoid> Term<C> {
    pub fn var(i: usize) -> Self {
        Term::Var(i)
    }

    pub fn suc(t: Term<C>) -> Self {
        Term::Suc(Box::new(t))
    }

    pub fn ret(t: Term<C>) -> Self {
        Term::Ret(Box::new(t))
    }

    pub fn bind(e: Term<C>, body: Term<C>) -> Self {
        Term::Bind(Box::new(e), Box::new(body))
    }

    pub fn step(c: C, e: Term<C>) -> Self {
        Term::Step(CostExpr::Lit(c), Box::new(e))
    }

    pub fn step_expr(c: CostExpr<C>, e: Term<C>) -> Self {
        Term::Step(c, Box::new(e))
    }

    pub fn lam(body: Term<C>) -> Self {
        Term::Lam(Box::new(body))
    }

    pub fn ap(f: Term<C>, a: Term<C>) -> Self {
        Term::Ap(Box::new(f), Box::new(a))
    }

    pub fn pair(a: Term<C>, b: Term<C>) -> Self {
        Term::Pair(Box::new(a), Box::new(b))
    }

    pub fn split(p: Term<C>, body: Term<C>) -> Self {
        Term::Split(Box::new(p), Box::new(body))
    }

    pub fn seal(t: Term<C>) -> Self {
        Term::Seal(Box::new(t))
    }

    pub fn plam(t: Term<C>) -> Self {
        Term::PLam(Box::new(t))
    }

    pub fn pap(t: Term<C>) -> Self {
        Term::PAp(Box::new(t))
    }

    pub fn ind(scrutinee: Term<C>, motive: CompType<C>, zero: Term<C>, suc: Term<C>) -> Self {
        Term::Ind {
            scrutinee: Box::new(scrutinee),
            motive: Box::new(motive),
            zero: Box::new(zero),
            suc: Box::new(suc),
        }
    }

    pub fn unseal(scrutinee: Term<C>, motive: CompType<C>, eta: Term<C>, star: Term<C>) -> Self {
        Term::UnsealInd {
            scrutinee: Box::new(scrutinee),
            motive: Box::new(motive),
            eta: Box::new(eta),
            star: Box::new(star),
        }
    }

    /// Rebuilds the term, replacing each variable by `on_var(index, depth)`.
    pub(crate) fn traverse(&self, depth: usize, on_var: VarFn<'_, C>) -> Term<C> {
        let go = |t: &Term<C>, extra: usize| Box::new(t.traverse(depth + extra, on_var));
        match self {
            Term::Var(i) => on_var(*i, depth),
            Term::Zero => Term::Zero,
            Term::Suc(t) => Term::Suc(go(t, 0)),
            Term::Ret(t) => Term::Ret(go(t, 0)),
            Term::Bind(e, body) => Term::Bind(go(e, 0), go(body, 1)),
            Term::Step(c, e) => Term::Step(c.clone(), go(e, 0)),
            Term::Lam(body) => Term::Lam(go(body, 1)),
            Term::Ap(f, a) => Term::Ap(go(f, 0), go(a, 0)),
            Term::Pair(a, b) => Term::Pair(go(a, 0), go(b, 0)),
            Term::Split(p, body) => Term::Split(go(p, 0), go(body, 2)),
            Term::Refl => Term::Refl,
            Term::Seal(t) => Term::Seal(go(t, 0)),
            Term::Star => Term::Star,
            Term::UnsealInd {
                scrutinee,
                motive,
                eta,
                star,
            } => Term::UnsealInd {
                scrutinee: go(scrutinee, 0),
                motive: Box::new(motive.traverse(depth + 1, on_var)),
                eta: go(eta, 1),
                star: go(star, 0),
            },
            Term::PLam(t) => Term::PLam(go(t, 0)),
            Term::PAp(t) => Term::PAp(go(t, 0)),
            Term::Ind {
                scrutinee,
                motive,
                zero,
                suc,
            } => Term::Ind {
                scrutinee: go(scrutinee, 0),
                motive: Box::new(motive.traverse(depth + 1, on_var)),
                zero: go(zero, 0),
                suc: go(suc, 2),
            },
        }
    }

    /// Adds `amount` to every index at or above `cutoff`.
    pub fn shift(&self, amount: usize, cutoff: usize) -> Term<C> {
        if amount == 0 {
            return self.clone();
        }
        self.traverse(0, &|i, d| {
            if i >= d + cutoff {
                Term::Var(i + amount)
            } else {
                Term::Var(i)
            }
        })
    }

    /// Removes `amount` binders at the top of scope, or `None` if one of them
    /// is referenced.
    pub fn unshift(&self, amount: usize) -> Option<Term<C>> {
        if (0..amount).any(|k| self.mentions(k)) {
            return None;
        }
        Some(self.traverse(0, &|i, d| {
            if i >= d + amount {
                Term::Var(i - amount)
            } else {
                Term::Var(i)
            }
        }))
    }

    /// Applies a parallel substitution: free variable `i` becomes `sub(i)`,
    /// where `sub(i)` lives in the target scope.
    pub fn substitute(&self, sub: &dyn Fn(usize) -> Term<C>) -> Term<C> {
        self.traverse(0, &|i, d| {
            if i < d {
                Term::Var(i)
            } else {
                sub(i - d).shift(d, 0)
            }
        })
    }

    /// `body[replacement / 0]`, shifting the remaining free variables down.
    pub fn subst(&self, replacement: &Term<C>) -> Term<C> {
        self.substitute(&|i| {
            if i == 0 {
                replacement.clone()
            } else {
                Term::Var(i - 1)
            }
        })
    }

    /// Instantiates the two innermost variables: index 1 by `outer`,
    /// index 0 by `inner`.
    pub fn subst2(&self, outer: &Term<C>, inner: &Term<C>) -> Term<C> {
        self.substitute(&|i| match i {
            0 => inner.clone(),
            1 => outer.clone(),
            _ => Term::Var(i - 2),
        })
    }

    /// Whether free variable `index` occurs.
    pub fn mentions(&self, index: usize) -> bool {
        let found = std::cell::Cell::new(false);
        self.traverse(0, &|i, d| {
            if i >= d && i - d == index {
                found.set(true);
            }
            Term::Var(i)
        });
        found.get()
    }

    pub fn is_closed(&self) -> bool {
        self.free_bound() == 0
    }

    /// One more than the largest free index, or 0 when closed.
    pub fn free_bound(&self) -> usize {
        let bound = std::cell::Cell::new(0usize);
        self.traverse(0, &|i, d| {
            if i >= d {
                bound.set(bound.get().max(i - d + 1));
            }
            Term::Var(i)
        });
        bound.get()
    }

    /// Number of term nodes; types and cost annotations are not counted.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Immediate term children, in field order.
    pub fn children(&self) -> Vec<&Term<C>> {
        match self {
            Term::Var(_) | Term::Zero | Term::Refl | Term::Star => vec![],
            Term::Suc(t)
            | Term::Ret(t)
            | Term::Lam(t)
            | Term::Seal(t)
            | Term::PLam(t)
            | Term::PAp(t) => {
                vec![t]
            }
            Term::Step(_, t) => vec![t],
            Term::Bind(a, b) | Term::Ap(a, b) | Term::Pair(a, b) | Term::Split(a, b) => vec![a, b],
            Term::UnsealInd {
                scrutinee,
                eta,
                star,
                ..
            } => vec![scrutinee, eta, star],
            Term::Ind {
                scrutinee,
                zero,
                suc,
                ..
            } => vec![scrutinee, zero, suc],
        }
    }

    pub fn constructor(&self) -> Constructor {
        match self {
            Term::Var(_) => Constructor::Var,
            Term::Zero => Constructor::Zero,
            Term::Suc(_) => Constructor::Suc,
            Term::Ret(_) => Constructor::Ret,
            Term::Bind(..) => Constructor::Bind,
            Term::Step(..) => Constructor::Step,
            Term::Lam(_) => Constructor::Lam,
            Term::Ap(..) => Constructor::Ap,
            Term::Pair(..) => Constructor::Pair,
            Term::Split(..) => Constructor::Split,
            Term::Refl => Constructor::Refl,
            Term::Seal(_) => Constructor::Seal,
            Term::Star => Constructor::Star,
            Term::UnsealInd { .. } => Constructor::UnsealInd,
            Term::PLam(_) => Constructor::PLam,
            Term::PAp(_) => Constructor::PAp,
            Term::Ind { .. } => Constructor::Ind,
        }
    }

    /// Visits every term node, including those inside motives.
    pub fn for_each_node(&self, f: &mut dyn FnMut(&Term<C>)) {
        f(self);
        match self {
            Term::Ind { motive, .. } | Term::UnsealInd { motive, .. } => motive.for_each_term(f),
            _ => {}
        }
        for child in self.children() {
            child.for_each_node(f);
        }
    }
}

/// Term constructor tags, used for generator coverage counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constructor {
    Var,
    Zero,
    Suc,
    Ret,
    Bind,
    Step,
    Lam,
    Ap,
    Pair,
    Split,
    Refl,
    Seal,
    Star,
    UnsealInd,
    PLam,
    PAp,
    Ind,
}

impl Constructor {
    pub const ALL: [Constructor; 17] = [
        Constructor::Var,
        Constructor::Zero,
        Constructor::Suc,
        Constructor::Ret,
        Constructor::Bind,
        Constructor::Step,
        Constructor::Lam,
        Constructor::Ap,
        Constructor::Pair,
        Constructor::Split,
        Constructor::Refl,
        Constructor::Seal,
        Constructor::Star,
        Constructor::UnsealInd,
        Constructor::PLam,
        Constructor::PAp,
        Constructor::Ind,
    ];
}

impl fmt::Display for Constructor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl<C: CostMonoid> ValType<C> {
    pub fn u(x: CompType<C>) -> Self {
        ValType::U(Box::new(x))
    }

    pub fn sig(a: ValType<C>, b: ValType<C>) -> Self {
        ValType::Sig(Box::new(a), Box::new(b))
    }

    pub fn eq(a: ValType<C>, l: Term<C>, r: Term<C>) -> Self {
        ValType::Eq(Box::new(a), Box::new(l), Box::new(r))
    }

    pub fn op(a: ValType<C>) -> Self {
        ValType::Op(Box::new(a))
    }

    pub fn cl(a: ValType<C>) -> Self {
        ValType::Cl(Box::new(a))
    }

    /// `U (F a)`, the type of computations returning `a`.
    pub fn comp_f(a: ValType<C>) -> Self {
        ValType::u(CompType::f(a))
    }

    pub(crate) fn traverse(&self, depth: usize, on_var: VarFn<'_, C>) -> ValType<C> {
        match self {
            ValType::Nat => ValType::Nat,
            ValType::U(x) => ValType::U(Box::new(x.traverse(depth, on_var))),
            ValType::Sig(a, b) => ValType::Sig(
                Box::new(a.traverse(depth, on_var)),
                Box::new(b.traverse(depth + 1, on_var)),
            ),
            ValType::Eq(a, l, r) => ValType::Eq(
                Box::new(a.traverse(depth, on_var)),
                Box::new(l.traverse(depth, on_var)),
                Box::new(r.traverse(depth, on_var)),
            ),
            ValType::Op(a) => ValType::Op(Box::new(a.traverse(depth, on_var))),
            ValType::Cl(a) => ValType::Cl(Box::new(a.traverse(depth, on_var))),
        }
    }

    pub fn shift(&self, amount: usize, cutoff: usize) -> ValType<C> {
        if amount == 0 {
            return self.clone();
        }
        self.traverse(0, &|i, d| {
            if i >= d + cutoff {
                Term::Var(i + amount)
            } else {
                Term::Var(i)
            }
        })
    }

    pub fn unshift(&self, amount: usize) -> Option<ValType<C>> {
        if (0..amount).any(|k| self.mentions(k)) {
            return None;
        }
        Some(self.traverse(0, &|i, d| {
            if i >= d + amount {
                Term::Var(i - amount)
            } else {
                Term::Var(i)
            }
        }))
    }

    pub fn substitute(&self, sub: &dyn Fn(usize) -> Term<C>) -> ValType<C> {
        self.traverse(0, &|i, d| {
            if i < d {
                Term::Var(i)
            } else {
                sub(i - d).shift(d, 0)
            }
        })
    }

    pub fn subst(&self, replacement: &Term<C>) -> ValType<C> {
        self.substitute(&|i| {
            if i == 0 {
                replacement.clone()
            } else {
                Term::Var(i - 1)
            }
        })
    }

    pub fn mentions(&self, index: usize) -> bool {
        let found = std::cell::Cell::new(false);
        self.traverse(0, &|i, d| {
            if i >= d && i - d == index {
                found.set(true);
            }
            Term::Var(i)
        });
        found.get()
    }

    pub fn for_each_term(&self, f: &mut dyn FnMut(&Term<C>)) {
        match self {
            ValType::Nat => {}
            ValType::U(x) => x.for_each_term(f),
            ValType::Sig(a, b) => {
                a.for_each_term(f);
                b.for_each_term(f);
            }
            ValType::Eq(a, l, r) => {
                a.for_each_term(f);
                l.for_each_node(f);
                r.for_each_node(f);
            }
            ValType::Op(a) | ValType::Cl(a) => a.for_each_term(f),
        }
    }

    /// Ground types admit readback and erasure.
    pub fn is_ground(&self) -> bool {
        match self {
            ValType::Nat | ValType::Eq(..) => true,
            ValType::Sig(a, b) => a.is_ground() && b.is_ground(),
            ValType::Op(a) | ValType::Cl(a) => a.is_ground(),
            ValType::U(x) => match x.as_ref() {
                CompType::F(a) => a.is_ground(),
                CompType::Pi(..) => false,
            },
        }
    }
}

impl<C: CostMonoid> CompType<C> {
    pub fn f(a: ValType<C>) -> Self {
        CompType::F(Box::new(a))
    }

    pub fn pi(a: ValType<C>, x: CompType<C>) -> Self {
        CompType::Pi(Box::new(a), Box::new(x))
    }

    pub(crate) fn traverse(&self, depth: usize, on_var: VarFn<'_, C>) -> CompType<C> {
        match self {
            CompType::F(a) => CompType::F(Box::new(a.traverse(depth, on_var))),
            CompType::Pi(a, x) => CompType::Pi(
                Box::new(a.traverse(depth, on_var)),
                Box::new(x.traverse(depth + 1, on_var)),
            ),
        }
    }

    pub fn shift(&self, amount: usize, cutoff: usize) -> CompType<C> {
        ValType::U(Box::new(self.clone()))
            .shift(amount, cutoff)
            .into_comp()
    }

    pub fn substitute(&self, sub: &dyn Fn(usize) -> Term<C>) -> CompType<C> {
        ValType::U(Box::new(self.clone()))
            .substitute(sub)
            .into_comp()
    }

    pub fn subst(&self, replacement: &Term<C>) -> CompType<C> {
        ValType::U(Box::new(self.clone()))
            .subst(replacement)
            .into_comp()
    }

    pub fn mentions(&self, index: usize) -> bool {
        ValType::U(Box::new(self.clone())).mentions(index)
    }

    pub fn for_each_term(&self, f: &mut dyn FnMut(&Term<C>)) {
        match self {
            CompType::F(a) => a.for_each_term(f),
            CompType::Pi(a, x) => {
                a.for_each_term(f);
                x.for_each_term(f);
            }
        }
    }
}

impl<C> ValType<C> {
    fn into_comp(self) -> CompType<C> {
        match self {
            ValType::U(x) => *x,
            _ => unreachable!("wrapped computation type"),
        }
    }
}

/// De Bruijn structural equality, comparing costs after normalization.
pub fn alpha_eq<C: CostMonoid>(a: &Term<C>, b: &Term<C>) -> bool {
    use Term::*;
    match (a, b) {
        (Var(i), Var(j)) => i == j,
        (Zero, Zero) | (Refl, Refl) | (Star, Star) => true,
        (Suc(x), Suc(y))
        | (Ret(x), Ret(y))
        | (Lam(x), Lam(y))
        | (Seal(x), Seal(y))
        | (PLam(x), PLam(y))
        | (PAp(x), PAp(y)) => alpha_eq(x, y),
        (Bind(x1, x2), Bind(y1, y2))
        | (Ap(x1, x2), Ap(y1, y2))
        | (Pair(x1, x2), Pair(y1, y2))
        | (Split(x1, x2), Split(y1, y2)) => alpha_eq(x1, y1) && alpha_eq(x2, y2),
        (Step(c, x), Step(d, y)) => c.normalize() == d.normalize() && alpha_eq(x, y),
        (
            UnsealInd {
                scrutinee: s1,
                motive: m1,
                eta: e1,
                star: t1,
            },
            UnsealInd {
                scrutinee: s2,
                motive: m2,
                eta: e2,
                star: t2,
            },
        ) => alpha_eq(s1, s2) && comp_alpha_eq(m1, m2) && alpha_eq(e1, e2) && alpha_eq(t1, t2),
        (
            Ind {
                scrutinee: s1,
                motive: m1,
                zero: z1,
                suc: u1,
            },
            Ind {
                scrutinee: s2,
                motive: m2,
                zero: z2,
                suc: u2,
            },
        ) => alpha_eq(s1, s2) && comp_alpha_eq(m1, m2) && alpha_eq(z1, z2) && alpha_eq(u1, u2),
        _ => false,
    }
}

pub fn val_alpha_eq<C: CostMonoid>(a: &ValType<C>, b: &ValType<C>) -> bool {
    match (a, b) {
        (ValType::Nat, ValType::Nat) => true,
        (ValType::U(x), ValType::U(y)) => comp_alpha_eq(x, y),
        (ValType::Sig(a1, b1), ValType::Sig(a2, b2)) => {
            val_alpha_eq(a1, a2) && val_alpha_eq(b1, b2)
        }
        (ValType::Eq(a1, l1, r1), ValType::Eq(a2, l2, r2)) => {
            val_alpha_eq(a1, a2) && alpha_eq(l1, l2) && alpha_eq(r1, r2)
        }
        (ValType::Op(x), ValType::Op(y)) | (ValType::Cl(x), ValType::Cl(y)) => val_alpha_eq(x, y),
        _ => false,
    }
}

pub fn comp_alpha_eq<C: CostMonoid>(a: &CompType<C>, b: &CompType<C>) -> bool {
    match (a, b) {
        (CompType::F(x), CompType::F(y)) => val_alpha_eq(x, y),
        (CompType::Pi(a1, x1), CompType::Pi(a2, x2)) => {
            val_alpha_eq(a1, a2) && comp_alpha_eq(x1, x2)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::NatAdd;
    use proptest::prelude::*;

    type T = Term<NatAdd>;

    fn lit(n: u64) -> CostExpr<NatAdd> {
        CostExpr::Lit(NatAdd(n))
    }

    #[test]
    fn subst_plugs_the_hole() {
        let body: T = Term::suc(Term::Var(0));
        assert_eq!(body.subst(&Term::Zero), Term::suc(Term::Zero));
    }

    #[test]
    fn subst_shifts_other_indices_down() {
        let body: T = Term::Var(1);
        assert_eq!(body.subst(&Term::Zero), Term::Var(0));
    }

    #[test]
    fn subst_avoids_capture_under_binders() {
        let body: T = Term::lam(Term::ap(Term::Var(0), Term::Var(1)));
        assert_eq!(
            body.subst(&Term::suc(Term::Zero)),
            Term::lam(Term::ap(Term::Var(0), Term::suc(Term::Zero)))
        );
        // an open replacement is weakened when it moves under the lambda
        assert_eq!(
            body.subst(&Term::Var(3)),
            Term::lam(Term::ap(Term::Var(0), Term::Var(4)))
        );
    }

    #[test]
    fn subst_reaches_into_motives() {
        let motive = CompType::f(ValType::eq(ValType::Nat, Term::Var(0), Term::Var(1)));
        let t: T = Term::ind(
            Term::Zero,
            motive,
            Term::ret(Term::Refl),
            Term::ret(Term::Refl),
        );
        let Term::Ind { motive, .. } = t.subst(&numeral(2)) else {
            unreachable!()
        };
        assert_eq!(
            *motive,
            CompType::f(ValType::eq(ValType::Nat, Term::Var(0), numeral(2)))
        );
    }

    #[test]
    fn alpha_eq_examples() {
        assert!(alpha_eq::<NatAdd>(
            &Term::lam(Term::Var(0)),
            &Term::lam(Term::Var(0))
        ));
        let a: T = Term::step_expr(CostExpr::sum(lit(1), lit(2)), Term::ret(Term::Zero));
        let b: T = Term::step_expr(lit(3), Term::ret(Term::Zero));
        assert!(alpha_eq(&a, &b));
        assert!(!alpha_eq::<NatAdd>(&Term::Zero, &Term::suc(Term::Zero)));
        let z: T = Term::step_expr(CostExpr::Zero, Term::ret(Term::Zero));
        assert!(alpha_eq(
            &z,
            &Term::step_expr(lit(0), Term::ret(Term::Zero))
        ));
    }

    #[test]
    fn numerals() {
        assert_eq!(numeral::<NatAdd>(0), Term::Zero);
        assert_eq!(numeral::<NatAdd>(2), Term::suc(Term::suc(Term::Zero)));
        let five: T = numeral(5);
        let mut sucs = 0;
        five.for_each_node(&mut |t| {
            if matches!(t, Term::Suc(_)) {
                sucs += 1
            }
        });
        assert_eq!(sucs, 5);
        assert_eq!(as_numeral(&five), Some(5));
    }

    #[test]
    fn context_lookup_skips_phase_entries() {
        let ctx = Context::<NatAdd>::new()
            .with_var(ValType::Nat)
            .with_phase()
            .with_var(ValType::eq(ValType::Nat, Term::Var(0), Term::Var(0)));
        assert_eq!(ctx.lookup(1), Some(ValType::Nat));
        assert_eq!(
            ctx.lookup(0),
            Some(ValType::eq(ValType::Nat, Term::Var(1), Term::Var(1)))
        );
        assert_eq!(ctx.lookup(2), None);
        assert!(ctx.has_phase());
    }

    #[test]
    fn unfold_replaces_definitions() {
        let ctx = Context::<NatAdd>::new()
            .with_def(ValType::Nat, numeral(1))
            .with_def(ValType::Nat, Term::suc(Term::Var(0)))
            .with_var(ValType::Nat);
        let t = Term::pair(Term::Var(1), Term::lam(Term::Var(3)));
        assert_eq!(
            ctx.unfold(&t),
            Term::pair(numeral(2), Term::lam(numeral(1)))
        );
    }

    fn arb_term(depth: u32) -> impl Strategy<Value = T> {
        let leaf = prop_oneof![
            (0usize..4).prop_map(Term::Var),
            Just(Term::Zero),
            Just(Term::Refl),
            Just(Term::Star),
        ];
        leaf.prop_recursive(depth, 48, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(Term::suc),
                inner.clone().prop_map(Term::ret),
                inner.clone().prop_map(Term::lam),
                inner.clone().prop_map(Term::plam),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::bind(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::ap(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::split(a, b)),
                (0u64..4, inner.clone()).prop_map(|(c, e)| Term::step(NatAdd(c), e)),
                (inner.clone(), inner.clone(), inner.clone()).prop_map(|(s, z, u)| Term::ind(
                    s,
                    CompType::f(ValType::eq(ValType::Nat, Term::Var(0), Term::Var(1))),
                    z,
                    u
                )),
                (inner.clone(), inner.clone(), inner).prop_map(|(s, e, t)| Term::unseal(
                    s,
                    CompType::f(ValType::Nat),
                    e,
                    t
                )),
            ]
        })
    }

    proptest! {
        // t[u/1][v/0] == t[v/0][u[v/0]/0]  (substitution lemma, both in the outer scope)
        #[test]
        fn substitution_composes(t in arb_term(4), u in arb_term(2), v in arb_term(2)) {
            let lhs = t.subst2(&u, &v);
            let inner_first = t.subst(&v.shift(1, 0));
            let rhs = inner_first.subst(&u);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn shift_then_subst_is_identity(t in arb_term(4), u in arb_term(2)) {
            prop_assert_eq!(t.shift(1, 0).subst(&u), t);
        }

        #[test]
        fn unshift_inverts_shift(t in arb_term(4)) {
            prop_assert_eq!(t.shift(2, 0).unshift(2), Some(t));
        }

        #[test]
        fn alpha_eq_is_an_equivalence(a in arb_term(3), b in arb_term(3)) {
            prop_assert!(alpha_eq(&a, &a));
            prop_assert_eq!(alpha_eq(&a, &b), alpha_eq(&b, &a));
            prop_assert_eq!(alpha_eq(&a, &b), a == b);
        }

        #[test]
        fn numeral_is_injective(m in 0u64..40, n in 0u64..40) {
            prop_assert_eq!(alpha_eq(&numeral::<NatAdd>(m), &numeral(n)), m == n);
        }
    }
}
