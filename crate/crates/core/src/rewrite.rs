//! Oriented equational theory and the definitional-equality decision
//! procedure built on it.
//!
//! Terms are normalized innermost-leftmost: children first, then the root is
//! contracted and the result renormalized. Each contraction consumes one unit
//! of fuel. Two terms are equal when their normal forms are alpha-equivalent.
//! They are distinct only when both normal forms are ground data (numerals,
//! pairs, `refl`, sealed data, `ret` of data, and one cost step around it)
//! and differ. Everything else is undecided.
//!
//! The `phase` flag says whether a behavioral phase is assumed at the root.
//! Under it, cost steps vanish and every sealed value collapses to `*`. The
//! bodies of `plam` and the `*` branch of `unseal` are always normalized
//! under the phase.

use std::fmt;

use crate::cost::CostMonoid;
use crate::syntax::{alpha_eq, CostExpr, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    BindBeta,
    BindStep,
    BindAssoc,
    BindEta,
    StepZero,
    StepPlus,
    StepBeh,
    SealStar,
    ApStep,
    LamStep,
    PiBeta,
    PiEta,
    SigBeta,
    SigEta,
    OpBeta,
    OpEta,
    IndZero,
    IndSuc,
    UnsealSeal,
    UnsealStar,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::BindBeta => "bind-beta",
            Rule::BindStep => "bind-step",
            Rule::BindAssoc => "bind-assoc",
            Rule::BindEta => "bind-eta",
            Rule::StepZero => "step-zero",
            Rule::StepPlus => "step-plus",
            Rule::StepBeh => "step-beh",
            Rule::SealStar => "seal-star",
            Rule::ApStep => "ap-step",
            Rule::LamStep => "lam-step",
            Rule::PiBeta => "pi-beta",
            Rule::PiEta => "pi-eta",
            Rule::SigBeta => "sig-beta",
            Rule::SigEta => "sig-eta",
            Rule::OpBeta => "op-beta",
            Rule::OpEta => "op-eta",
            Rule::IndZero => "ind-zero",
            Rule::IndSuc => "ind-suc",
            Rule::UnsealSeal => "unseal-seal",
            Rule::UnsealStar => "unseal-star",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Deliberately unsound variants of single rules. They exist so the law
/// suite can demonstrate that it notices a broken rewriter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// `bind x <- step{c} e; f` loses `c`.
    BindStepDropCost,
    /// `(step{c} e) v` charges `c` twice.
    ApStepDoubleCost,
}

impl Mutation {
    pub const ALL: [Mutation; 2] = [Mutation::BindStepDropCost, Mutation::ApStepDoubleCost];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::BindStepDropCost => "bind-step-drop-cost",
            Mutation::ApStepDoubleCost => "ap-step-double-cost",
        }
    }
}

impl std::str::FromStr for Mutation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mutation::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mutation `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RewriteConfig {
    pub fuel: u64,
    pub mutation: Option<Mutation>,
}

impl Default for RewriteConfig {
    fn default() -> Self {
        RewriteConfig {
            fuel: 100_000,
            mutation: None,
        }
    }
}

impl RewriteConfig {
    pub fn with_fuel(fuel: u64) -> Self {
        RewriteConfig {
            fuel,
            mutation: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lhs,
    Rhs,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Firing {
    pub rule: Rule,
    pub side: Option<Side>,
    /// Child indices from the root, in `Term::children` order. Firings inside
    /// the recursive call of an `ind-suc` step are reported at the `ind`
    /// node, since that call never appears in the rewritten term.
    pub path: Vec<usize>,
}

impl fmt::Display for Firing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ ", self.rule)?;
        match self.side {
            Some(Side::Lhs) => f.write_str("lhs:")?,
            Some(Side::Rhs) => f.write_str("rhs:")?,
            None => {}
        }
        if self.path.is_empty() {
            f.write_str("root")
        } else {
            let parts: Vec<String> = self.path.iter().map(|i| i.to_string()).collect();
            f.write_str(&parts.join("."))
        }
    }
}

pub type Trace = Vec<Firing>;

/// Result of [`normalize`]. When `exhausted` is set, `term` is the partially
/// rewritten term at the moment fuel ran out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized<C> {
    pub term: Term<C>,
    pub trace: Trace,
    pub exhausted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<C> {
    Equal(Trace),
    Distinct { lhs: Term<C>, rhs: Term<C> },
    Undecided { reason: String },
}

impl<C> Verdict<C> {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal(_))
    }

    pub fn is_distinct(&self) -> bool {
        matches!(self, Verdict::Distinct { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Equal(_) => "equal",
            Verdict::Distinct { .. } => "distinct",
            Verdict::Undecided { .. } => "undecided",
        }
    }
}

struct Normalizer {
    fuel: u64,
    mutation: Option<Mutation>,
    side: Option<Side>,
    path: Vec<usize>,
    trace: Trace,
    exhausted: bool,
}

impl Normalizer {
    fn new(config: &RewriteConfig, side: Option<Side>) -> Self {
        Normalizer {
            fuel: config.fuel,
            mutation: config.mutation,
            side,
            path: Vec::new(),
            trace: Vec::new(),
            exhausted: false,
        }
    }

    fn child<C: CostMonoid>(&mut self, index: usize, t: &Term<C>, phase: bool) -> Box<Term<C>> {
        self.path.push(index);
        let out = self.norm(t, phase);
        self.path.pop();
        Box::new(out)
    }

    fn norm<C: CostMonoid>(&mut self, t: &Term<C>, phase: bool) -> Term<C> {
        let t = match t {
            Term::Var(_) | Term::Zero | Term::Refl | Term::Star => t.clone(),
            Term::Suc(a) => Term::Suc(self.child(0, a, phase)),
            Term::Ret(a) => Term::Ret(self.child(0, a, phase)),
            Term::Seal(a) => Term::Seal(self.child(0, a, phase)),
            Term::Lam(a) => Term::Lam(self.child(0, a, phase)),
            Term::PLam(a) => Term::PLam(self.child(0, a, true)),
            Term::PAp(a) => Term::PAp(self.child(0, a, phase)),
            Term::Step(c, a) => Term::Step(CostExpr::Lit(c.normalize()), self.child(0, a, phase)),
            Term::Bind(a, b) => Term::Bind(self.child(0, a, phase), self.child(1, b, phase)),
            Term::Ap(a, b) => Term::Ap(self.child(0, a, phase), self.child(1, b, phase)),
            Term::Pair(a, b) => Term::Pair(self.child(0, a, phase), self.child(1, b, phase)),
            Term::Split(a, b) => Term::Split(self.child(0, a, phase), self.child(1, b, phase)),
            Term::UnsealInd {
                scrutinee,
                motive,
                eta,
                star,
            } => Term::UnsealInd {
                scrutinee: self.child(0, scrutinee, phase),
                motive: motive.clone(),
                eta: self.child(1, eta, phase),
                star: self.child(2, star, true),
            },
            Term::Ind {
                scrutinee,
                motive,
                zero,
                suc,
            } => Term::Ind {
                scrutinee: self.child(0, scrutinee, phase),
                motive: motive.clone(),
                zero: self.child(1, zero, phase),
                suc: self.child(2, suc, phase),
            },
        };
        if self.exhausted {
            return t;
        }
        if let Term::Ind {
            scrutinee,
            motive,
            zero,
            suc,
        } = &t
        {
            if let Term::Suc(n) = &**scrutinee {
                // The branch may mention the recursive call several times, so
                // it is normalized once before being substituted.
                if !self.spend(Rule::IndSuc, phase) {
                    return t;
                }
                let rec = Term::Ind {
                    scrutinee: n.clone(),
                    motive: motive.clone(),
                    zero: zero.clone(),
                    suc: suc.clone(),
                };
                let rec = self.norm(&rec, phase);
                if self.exhausted {
                    return t;
                }
                return self.norm(&suc.subst2(n, &rec), phase);
            }
        }
        match self.contract(&t, phase) {
            Some((rule, next)) => {
                if !self.spend(rule, phase) {
                    return t;
                }
                self.norm(&next, phase)
            }
            None => t,
        }
    }

    /// Pays one unit of fuel for a firing at the current path.
    fn spend(&mut self, rule: Rule, phase: bool) -> bool {
        if self.fuel == 0 {
            self.exhausted = true;
            return false;
        }
        debug_assert!(phase || !matches!(rule, Rule::StepBeh | Rule::SealStar));
        self.fuel -= 1;
        self.trace.push(Firing {
            rule,
            side: self.side,
            path: self.path.clone(),
        });
        true
    }

    /// One root contraction of a term whose children are already normal.
    fn contract<C: CostMonoid>(&self, t: &Term<C>, phase: bool) -> Option<(Rule, Term<C>)> {
        match t {
            Term::Bind(e, f) => match &**e {
                Term::Step(c, inner) => Some((
                    Rule::BindStep,
                    if self.mutation == Some(Mutation::BindStepDropCost) {
                        Term::Bind(inner.clone(), f.clone())
                    } else {
                        Term::Step(c.clone(), Box::new(Term::Bind(inner.clone(), f.clone())))
                    },
                )),
                Term::Ret(v) => Some((Rule::BindBeta, f.subst(v))),
                Term::Bind(e1, f1) => Some((
                    Rule::BindAssoc,
                    Term::bind((**e1).clone(), Term::bind((**f1).clone(), f.shift(1, 1))),
                )),
                _ if matches!(&**f, Term::Ret(v) if **v == Term::Var(0)) => {
                    Some((Rule::BindEta, (**e).clone()))
                }
                _ => None,
            },
            Term::Step(c, e) => {
                if phase {
                    return Some((Rule::StepBeh, (**e).clone()));
                }
                let c = c.normalize();
                if c.is_zero() {
                    return Some((Rule::StepZero, (**e).clone()));
                }
                match &**e {
                    Term::Step(d, inner) => Some((
                        Rule::StepPlus,
                        Term::step(c.mplus(&d.normalize()), (**inner).clone()),
                    )),
                    _ => None,
                }
            }
            Term::Seal(_) if phase => Some((Rule::SealStar, Term::Star)),
            Term::Ap(f, v) => match &**f {
                Term::Step(c, e) => {
                    let c = if self.mutation == Some(Mutation::ApStepDoubleCost) {
                        let c = c.normalize();
                        CostExpr::Lit(c.mplus(&c))
                    } else {
                        c.clone()
                    };
                    Some((
                        Rule::ApStep,
                        Term::Step(c, Box::new(Term::Ap(e.clone(), v.clone()))),
                    ))
                }
                Term::Lam(body) => Some((Rule::PiBeta, body.subst(v))),
                _ => None,
            },
            Term::Lam(body) => match &**body {
                Term::Step(c, inner) => Some((
                    Rule::LamStep,
                    Term::Step(c.clone(), Box::new(Term::Lam(inner.clone()))),
                )),
                Term::Ap(f, x) if **x == Term::Var(0) => f.unshift(1).map(|f| (Rule::PiEta, f)),
                _ => None,
            },
            Term::Split(p, body) => match &**p {
                Term::Pair(a, b) => Some((Rule::SigBeta, body.subst2(a, &b.clone()))),
                _ if **body == Term::pair(Term::Var(1), Term::Var(0)) => {
                    Some((Rule::SigEta, (**p).clone()))
                }
                _ => None,
            },
            Term::PAp(e) => match &**e {
                Term::PLam(body) => Some((Rule::OpBeta, (**body).clone())),
                _ => None,
            },
            Term::PLam(body) => match &**body {
                Term::PAp(e) => Some((Rule::OpEta, (**e).clone())),
                _ => None,
            },
            Term::Ind {
                scrutinee, zero, ..
            } => match &**scrutinee {
                Term::Zero => Some((Rule::IndZero, (**zero).clone())),
                // `suc` scrutinees are handled in `norm`
                _ => None,
            },
            Term::UnsealInd {
                scrutinee,
                eta,
                star,
                ..
            } => match &**scrutinee {
                _ if phase => Some((Rule::UnsealStar, (**star).clone())),
                Term::Star => Some((Rule::UnsealStar, (**star).clone())),
                Term::Seal(a) => Some((Rule::UnsealSeal, eta.subst(a))),
                _ => None,
            },
            _ => None,
        }
    }
}

/// Rewrites `t` towards normal form.
pub fn normalize<C: CostMonoid>(t: &Term<C>, phase: bool, config: &RewriteConfig) -> Normalized<C> {
    let mut n = Normalizer::new(config, None);
    let term = n.norm(t, phase);
    Normalized {
        term,
        trace: n.trace,
        exhausted: n.exhausted,
    }
}

/// Ground data: the only normal forms whose disagreement proves inequality.
pub fn is_ground<C: CostMonoid>(t: &Term<C>) -> bool {
    fn data<C: CostMonoid>(t: &Term<C>) -> bool {
        match t {
            Term::Zero | Term::Refl | Term::Star => true,
            Term::Suc(a) | Term::Seal(a) => data(a),
            Term::Pair(a, b) => data(a) && data(b),
            _ => false,
        }
    }
    match t {
        Term::Step(_, e) => matches!(&**e, Term::Ret(v) if data(v)),
        Term::Ret(v) => data(v),
        other => data(other),
    }
}

/// Decides `a = b`, normalizing both sides with a shared fuel budget.
pub fn prove_equal<C: CostMonoid>(
    a: &Term<C>,
    b: &Term<C>,
    phase: bool,
    config: &RewriteConfig,
) -> Verdict<C> {
    if alpha_eq(a, b) {
        return Verdict::Equal(Vec::new());
    }
    let mut left = Normalizer::new(config, Some(Side::Lhs));
    let na = left.norm(a, phase);
    let mut right = Normalizer::new(
        &RewriteConfig {
            fuel: left.fuel,
            mutation: config.mutation,
        },
        Some(Side::Rhs),
    );
    let nb = right.norm(b, phase);
    if alpha_eq(&na, &nb) {
        let mut trace = left.trace;
        trace.extend(right.trace);
        Verdict::Equal(trace)
    } else if left.exhausted || right.exhausted {
        Verdict::Undecided {
            reason: "rewrite fuel exhausted".to_owned(),
        }
    } else if is_ground(&na) && is_ground(&nb) {
        Verdict::Distinct { lhs: na, rhs: nb }
    } else {
        Verdict::Undecided {
            reason: "normal forms differ and are not both ground".to_owned(),
        }
    }
}
