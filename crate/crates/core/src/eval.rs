//! Environment-based evaluation in two worlds.
//!
//! In the cost world a computation of type `F A` evaluates to a cost and a
//! value, and sealed values keep their contents. In the behavioral world
//! costs are `()` and every sealed value is `*`, so `unseal` always takes its
//! `*` branch. The body of `plam` is always evaluated behaviorally, against
//! an erased copy of the environment.
//!
//! The language is terminating, so computations are run eagerly: a
//! computation appearing in value position becomes a [`SemComp`] holding its
//! result (for `F A`) or a closure (for `Pi`).

use std::fmt::Debug;
use std::marker::PhantomData;
use std::sync::Arc;

use thiserror::Error;

use crate::cost::CostMonoid;
use crate::syntax::{numeral, Term};

/// How costs and sealed values are represented.
pub trait World<C: CostMonoid>: Clone + Debug + PartialEq + Send + Sync + Sized + 'static {
    type Cost: Clone + Debug + PartialEq + Send + Sync;

    fn zero() -> Self::Cost;
    fn lift(c: &C) -> Self::Cost;
    fn plus(a: &Self::Cost, b: &Self::Cost) -> Self::Cost;
    fn seal(v: SemVal<C, Self>) -> SemVal<C, Self>;
    /// Imports a behavioral value; the cost world refuses.
    fn from_beh(v: &SemVal<C, BehWorld>) -> Option<SemVal<C, Self>>;
    fn name() -> &'static str;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct CostWorld;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct BehWorld;

impl<C: CostMonoid> World<C> for CostWorld {
    type Cost = C;

    fn zero() -> C {
        C::mzero()
    }

    fn lift(c: &C) -> C {
        c.clone()
    }

    fn plus(a: &C, b: &C) -> C {
        a.mplus(b)
    }

    fn seal(v: SemVal<C, Self>) -> SemVal<C, Self> {
        SemVal::Sealed(Arc::new(v))
    }

    fn from_beh(_: &SemVal<C, BehWorld>) -> Option<SemVal<C, Self>> {
        None
    }

    fn name() -> &'static str {
        "cost"
    }
}

impl<C: CostMonoid> World<C> for BehWorld {
    type Cost = ();

    fn zero() {}

    fn lift(_: &C) {}

    fn plus(_: &(), _: &()) {}

    fn seal(_: SemVal<C, Self>) -> SemVal<C, Self> {
        SemVal::Star
    }

    fn from_beh(v: &SemVal<C, BehWorld>) -> Option<SemVal<C, Self>> {
        Some(v.clone())
    }

    fn name() -> &'static str {
        "beh"
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SemVal<C: CostMonoid, W: World<C>> {
    Num(u64),
    Pair(Arc<SemVal<C, W>>, Arc<SemVal<C, W>>),
    Refl,
    Sealed(Arc<SemVal<C, W>>),
    Star,
    Open(Arc<SemVal<C, BehWorld>>),
    Thunk(Arc<SemComp<C, W>>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum SemComp<C: CostMonoid, W: World<C>> {
    Returned {
        cost: W::Cost,
        value: SemVal<C, W>,
    },
    /// A function; `pending` is charged when it is applied.
    Closure {
        env: Env<C, W>,
        body: Arc<Term<C>>,
        pending: W::Cost,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Env<C: CostMonoid, W: World<C>> {
    head: Option<Arc<EnvNode<C, W>>>,
}

#[derive(Debug, PartialEq)]
struct EnvNode<C: CostMonoid, W: World<C>> {
    value: SemVal<C, W>,
    rest: Env<C, W>,
}

impl<C: CostMonoid, W: World<C>> Default for Env<C, W> {
    fn default() -> Self {
        Env { head: None }
    }
}

impl<C: CostMonoid, W: World<C>> Env<C, W> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&self, value: SemVal<C, W>) -> Self {
        Env {
            head: Some(Arc::new(EnvNode {
                value,
                rest: self.clone(),
            })),
        }
    }

    pub fn get(&self, index: usize) -> Option<&SemVal<C, W>> {
        let mut node = self.head.as_ref()?;
        for _ in 0..index {
            node = node.rest.head.as_ref()?;
        }
        Some(&node.value)
    }

    fn values(&self) -> Vec<&SemVal<C, W>> {
        let mut out = Vec::new();
        let mut cur = &self.head;
        while let Some(node) = cur {
            out.push(&node.value);
            cur = &node.rest.head;
        }
        out
    }

    /// The behavioral shadow of this environment.
    pub fn erase(&self) -> Env<C, BehWorld> {
        let mut out = Env::new();
        for v in self.values().into_iter().rev() {
            out = out.push(erase(v));
        }
        out
    }
}

/// Drops costs and the contents of sealed values.
pub fn erase<C: CostMonoid, W: World<C>>(v: &SemVal<C, W>) -> SemVal<C, BehWorld> {
    match v {
        SemVal::Num(n) => SemVal::Num(*n),
        SemVal::Pair(a, b) => SemVal::Pair(Arc::new(erase(a)), Arc::new(erase(b))),
        SemVal::Refl => SemVal::Refl,
        SemVal::Sealed(_) | SemVal::Star => SemVal::Star,
        SemVal::Open(b) => SemVal::Open(b.clone()),
        SemVal::Thunk(comp) => SemVal::Thunk(Arc::new(match &**comp {
            SemComp::Returned { value, .. } => SemComp::Returned {
                cost: (),
                value: erase(value),
            },
            SemComp::Closure { env, body, .. } => SemComp::Closure {
                env: env.erase(),
                body: body.clone(),
                pending: (),
            },
        })),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable #{0} during evaluation")]
    Unbound(usize),
    #[error("evaluation is stuck: {0}")]
    Stuck(String),
    #[error("papp outside the behavioral phase")]
    PhaseInCostWorld,
    #[error("evaluation step limit of {0} exceeded")]
    StepLimit(u64),
    #[error("numeral overflow")]
    Overflow,
}

pub type EvalResult<T> = Result<T, EvalError>;

/// Evaluator state: a step budget shared by both worlds.
pub struct Evaluator<C> {
    limit: u64,
    remaining: u64,
    _marker: PhantomData<C>,
}

impl<C: CostMonoid> Evaluator<C> {
    pub fn new(limit: u64) -> Self {
        Evaluator {
            limit,
            remaining: limit,
            _marker: PhantomData,
        }
    }

    pub fn steps_used(&self) -> u64 {
        self.limit - self.remaining
    }

    fn tick(&mut self) -> EvalResult<()> {
        if self.remaining == 0 {
            return Err(EvalError::StepLimit(self.limit));
        }
        self.remaining -= 1;
        Ok(())
    }

    fn stuck<T>(what: &str) -> EvalResult<T> {
        Err(EvalError::Stuck(what.to_owned()))
    }

    fn comp<W: World<C>>(v: SemVal<C, W>) -> EvalResult<Arc<SemComp<C, W>>> {
        match v {
            SemVal::Thunk(c) => Ok(c),
            _ => Self::stuck("expected a computation"),
        }
    }

    /// Charges `cost` before the computation `comp`.
    fn charge<W: World<C>>(cost: &W::Cost, comp: &SemComp<C, W>) -> SemComp<C, W> {
        match comp {
            SemComp::Returned { cost: c, value } => SemComp::Returned {
                cost: W::plus(cost, c),
                value: value.clone(),
            },
            SemComp::Closure { env, body, pending } => SemComp::Closure {
                env: env.clone(),
                body: body.clone(),
                pending: W::plus(cost, pending),
            },
        }
    }

    pub fn eval<W: World<C>>(&mut self, env: &Env<C, W>, t: &Term<C>) -> EvalResult<SemVal<C, W>> {
        self.tick()?;
        Ok(match t {
            Term::Var(i) => env.get(*i).cloned().ok_or(EvalError::Unbound(*i))?,
            Term::Zero => SemVal::Num(0),
            Term::Suc(n) => match self.eval(env, n)? {
                SemVal::Num(n) => SemVal::Num(n.checked_add(1).ok_or(EvalError::Overflow)?),
                _ => return Self::stuck("suc of a non-numeral"),
            },
            Term::Refl => SemVal::Refl,
            Term::Star => SemVal::Star,
            Term::Seal(a) => W::seal(self.eval(env, a)?),
            Term::Pair(a, b) => {
                SemVal::Pair(Arc::new(self.eval(env, a)?), Arc::new(self.eval(env, b)?))
            }
            Term::PLam(body) => SemVal::Open(Arc::new(self.eval(&env.erase(), body)?)),
            Term::PAp(e) => match self.eval(env, e)? {
                SemVal::Open(inner) => W::from_beh(&inner).ok_or(EvalError::PhaseInCostWorld)?,
                _ => return Self::stuck("papp of a non-plam value"),
            },
            Term::Ret(v) => SemVal::Thunk(Arc::new(SemComp::Returned {
                cost: W::zero(),
                value: self.eval(env, v)?,
            })),
            Term::Step(c, e) => {
                let inner = Self::comp(self.eval(env, e)?)?;
                SemVal::Thunk(Arc::new(Self::charge(&W::lift(&c.normalize()), &inner)))
            }
            Term::Lam(body) => SemVal::Thunk(Arc::new(SemComp::Closure {
                env: env.clone(),
                body: Arc::new((**body).clone()),
                pending: W::zero(),
            })),
            Term::Bind(e, f) => {
                let first = Self::comp(self.eval(env, e)?)?;
                let SemComp::Returned { cost, value } = &*first else {
                    return Self::stuck("bind of a function");
                };
                let rest = Self::comp(self.eval(&env.push(value.clone()), f)?)?;
                SemVal::Thunk(Arc::new(Self::charge(cost, &rest)))
            }
            Term::Ap(f, a) => {
                let fun = Self::comp(self.eval(env, f)?)?;
                let arg = self.eval(env, a)?;
                let SemComp::Closure {
                    env: closure_env,
                    body,
                    pending,
                } = &*fun
                else {
                    return Self::stuck("application of a non-function");
                };
                let result = Self::comp(self.eval(&closure_env.push(arg), body)?)?;
                SemVal::Thunk(Arc::new(Self::charge(pending, &result)))
            }
            Term::Split(p, body) => match self.eval(env, p)? {
                SemVal::Pair(a, b) => {
                    self.eval(&env.push((*a).clone()).push((*b).clone()), body)?
                }
                _ => return Self::stuck("split of a non-pair"),
            },
            Term::Ind {
                scrutinee,
                zero,
                suc,
                ..
            } => {
                let SemVal::Num(n) = self.eval(env, scrutinee)? else {
                    return Self::stuck("ind on a non-numeral");
                };
                let mut acc = self.eval(env, zero)?;
                for m in 0..n {
                    acc = self.eval(&env.push(SemVal::Num(m)).push(acc), suc)?;
                }
                acc
            }
            Term::UnsealInd {
                scrutinee,
                eta,
                star,
                ..
            } => match self.eval(env, scrutinee)? {
                SemVal::Sealed(a) => self.eval(&env.push((*a).clone()), eta)?,
                SemVal::Star => self.eval(env, star)?,
                _ => return Self::stuck("unseal of a non-sealed value"),
            },
        })
    }

    /// Runs a closed computation of type `F A`.
    pub fn run<W: World<C>>(&mut self, t: &Term<C>) -> EvalResult<(W::Cost, SemVal<C, W>)> {
        match &*Self::comp(self.eval(&Env::<C, W>::new(), t)?)? {
            SemComp::Returned { cost, value } => Ok((cost.clone(), value.clone())),
            SemComp::Closure { .. } => {
                Self::stuck("the program is a function, not a computation of type F A")
            }
        }
    }
}

/// Default evaluation step budget.
pub const DEFAULT_STEP_LIMIT: u64 = 50_000_000;

/// Runs a closed `F A` computation in the cost world.
pub fn run_cost<C: CostMonoid>(t: &Term<C>, limit: u64) -> EvalResult<(C, SemVal<C, CostWorld>)> {
    Evaluator::new(limit).run::<CostWorld>(t)
}

/// Runs a closed `F A` computation in the behavioral world.
pub fn run_beh<C: CostMonoid>(t: &Term<C>, limit: u64) -> EvalResult<SemVal<C, BehWorld>> {
    Evaluator::new(limit).run::<BehWorld>(t).map(|((), v)| v)
}

/// Reads a first-order value back as a term. Functions have no readback.
pub fn readback<C: CostMonoid, W: World<C>>(
    v: &SemVal<C, W>,
    cost_term: &dyn Fn(&W::Cost) -> Option<C>,
) -> Option<Term<C>> {
    Some(match v {
        SemVal::Num(n) => numeral(*n),
        SemVal::Pair(a, b) => Term::pair(readback(a, cost_term)?, readback(b, cost_term)?),
        SemVal::Refl => Term::Refl,
        SemVal::Star => Term::Star,
        SemVal::Sealed(a) => Term::seal(readback(a, cost_term)?),
        SemVal::Open(b) => Term::plam(readback(b, &|_: &()| None)?),
        SemVal::Thunk(comp) => match &**comp {
            SemComp::Returned { cost, value } => {
                let ret = Term::ret(readback(value, cost_term)?);
                match cost_term(cost) {
                    Some(c) if !c.is_zero() => Term::step(c, ret),
                    _ => ret,
                }
            }
            SemComp::Closure { .. } => return None,
        },
    })
}

pub fn readback_cost<C: CostMonoid>(v: &SemVal<C, CostWorld>) -> Option<Term<C>> {
    readback(v, &|c: &C| Some(c.clone()))
}

pub fn readback_beh<C: CostMonoid>(v: &SemVal<C, BehWorld>) -> Option<Term<C>> {
    readback(v, &|_: &()| None)
}

/// A closed computation of ground type together with its canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct Canonical<C: CostMonoid> {
    pub cost: C,
    pub value: Term<C>,
    /// `step{cost} ret value`, with the step omitted at zero cost.
    pub witness: Term<C>,
}

/// Evaluates a closed `F A` computation with `A` first-order and returns the
/// canonical term it is equal to.
pub fn canonize<C: CostMonoid>(t: &Term<C>, limit: u64) -> EvalResult<Canonical<C>> {
    let (cost, v) = run_cost(t, limit)?;
    let value = readback_cost(&v)
        .ok_or_else(|| EvalError::Stuck("result has no first-order readback".into()))?;
    let ret = Term::ret(value.clone());
    let witness = if cost.is_zero() {
        ret
    } else {
        Term::step(cost.clone(), ret)
    };
    Ok(Canonical {
        cost,
        value,
        witness,
    })
}
