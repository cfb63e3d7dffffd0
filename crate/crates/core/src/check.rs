//! Bidirectional type checking.
//!
//! `infer` synthesizes a value type; computations synthesize `U X`. `check`
//! pushes an expected type into introduction forms and otherwise falls back
//! to inference followed by type equality. Terms occurring inside types are
//! compared with [`prove_equal`] after top-level definitions are unfolded,
//! under the behavioral phase whenever the context assumes it.

use thiserror::Error;

use crate::cost::CostMonoid;
use crate::parse::{Diagnostic, SourceFile};
use crate::pretty;
use crate::rewrite::{prove_equal, RewriteConfig, Verdict};
use crate::syntax::{CompType, Context, Entry, Term, ValType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    UnboundVariable,
    Mismatch,
    Polarity,
    CannotInfer,
    PhaseRequired,
    Escape,
    Incoherent,
    UndecidedEquality,
}

impl ErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            ErrorKind::UnboundVariable => "unbound-variable",
            ErrorKind::Mismatch => "type-mismatch",
            ErrorKind::Polarity => "polarity",
            ErrorKind::CannotInfer => "cannot-infer",
            ErrorKind::PhaseRequired => "phase-required",
            ErrorKind::Escape => "scope-escape",
            ErrorKind::Incoherent => "incoherent-branches",
            ErrorKind::UndecidedEquality => "undecided-equality",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct TypeError {
    pub kind: ErrorKind,
    /// Child indices from the root of the checked declaration body.
    pub path: Vec<usize>,
    pub message: String,
}

impl TypeError {
    /// Whether the failure came from running out of equational reasoning
    /// rather than from an actual type error.
    pub fn is_undecided(&self) -> bool {
        self.kind == ErrorKind::UndecidedEquality
    }
}

pub type CheckResult<T> = Result<T, TypeError>;

/// Error in a whole program, tagged with the declaration it occurred in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FileError {
    /// `None` for `main`.
    pub decl: Option<usize>,
    pub error: TypeError,
}

impl FileError {
    pub fn to_diagnostic<C: CostMonoid>(&self, file: &SourceFile<C>) -> Diagnostic {
        let decl = match self.decl {
            Some(i) => &file.decls[i],
            None => &file.main,
        };
        let span = if self.error.path.is_empty() && self.error.kind == ErrorKind::Mismatch {
            decl.spans.span.clone()
        } else {
            decl.spans.locate(&self.error.path)
        };
        let d = Diagnostic::error(span, format!("{} in `{}`", self.error.message, decl.name));
        match self.error.kind {
            ErrorKind::Polarity => {
                d.with_hint("computations have type `U X` for some `F A` or `Pi`; values do not")
            }
            ErrorKind::PhaseRequired => {
                d.with_hint("only available under `plam` or in the `*` branch of `unseal`")
            }
            ErrorKind::UndecidedEquality => {
                d.with_hint("raise the rewrite fuel or simplify the equation")
            }
            _ => d,
        }
    }
}

pub struct Checker<'n> {
    pub config: RewriteConfig,
    def_names: &'n [String],
    path: Vec<usize>,
}

fn is_computation_former<C>(t: &Term<C>) -> bool {
    matches!(
        t,
        Term::Ret(_)
            | Term::Bind(..)
            | Term::Step(..)
            | Term::Lam(_)
            | Term::Ap(..)
            | Term::Split(..)
            | Term::Ind { .. }
            | Term::UnsealInd { .. }
    )
}

fn is_value_former<C>(t: &Term<C>) -> bool {
    matches!(
        t,
        Term::Zero
            | Term::Suc(_)
            | Term::Pair(..)
            | Term::Refl
            | Term::Seal(_)
            | Term::Star
            | Term::PLam(_)
    )
}

impl<'n> Checker<'n> {
    pub fn new(config: RewriteConfig) -> Self {
        Checker {
            config,
            def_names: &[],
            path: Vec::new(),
        }
    }

    /// Names used when printing types that mention definitions.
    pub fn with_names(config: RewriteConfig, def_names: &'n [String]) -> Self {
        Checker {
            config,
            def_names,
            path: Vec::new(),
        }
    }

    fn names<C: CostMonoid>(&self, ctx: &Context<C>) -> Vec<String> {
        let mut k = 0;
        ctx.entries()
            .iter()
            .filter(|e| matches!(e, Entry::TermVar { .. }))
            .map(|_| {
                let name = self
                    .def_names
                    .get(k)
                    .cloned()
                    .unwrap_or_else(|| format!("x{k}"));
                k += 1;
                name
            })
            .collect()
    }

    fn show<C: CostMonoid>(&self, ctx: &Context<C>, ty: &ValType<C>) -> String {
        pretty::decl_type_in(ty, &self.names(ctx))
    }

    fn show_term<C: CostMonoid>(&self, ctx: &Context<C>, t: &Term<C>) -> String {
        pretty::term_in(t, &self.names(ctx))
    }

    fn fail<T>(&self, kind: ErrorKind, message: impl Into<String>) -> CheckResult<T> {
        Err(TypeError {
            kind,
            path: self.path.clone(),
            message: message.into(),
        })
    }

    fn at<T>(
        &mut self,
        index: usize,
        f: impl FnOnce(&mut Self) -> CheckResult<T>,
    ) -> CheckResult<T> {
        self.path.push(index);
        let out = f(self);
        if out.is_ok() {
            self.path.pop();
        }
        out
    }

    /// Checks that two terms are definitionally equal.
    fn equal_terms<C: CostMonoid>(
        &self,
        ctx: &Context<C>,
        a: &Term<C>,
        b: &Term<C>,
        what: &str,
    ) -> CheckResult<()> {
        match prove_equal(
            &ctx.unfold(a),
            &ctx.unfold(b),
            ctx.has_phase(),
            &self.config,
        ) {
            Verdict::Equal(_) => Ok(()),
            Verdict::Distinct { .. } => self.fail(
                ErrorKind::Mismatch,
                format!(
                    "{what}: `{}` and `{}` are distinct",
                    self.show_term(ctx, a),
                    self.show_term(ctx, b)
                ),
            ),
            Verdict::Undecided { reason } => self.fail(
                ErrorKind::UndecidedEquality,
                format!(
                    "{what}: could not decide whether `{}` equals `{}` ({reason})",
                    self.show_term(ctx, a),
                    self.show_term(ctx, b)
                ),
            ),
        }
    }

    fn mismatch<T, C: CostMonoid>(
        &self,
        ctx: &Context<C>,
        expected: &ValType<C>,
        found: &ValType<C>,
    ) -> CheckResult<T> {
        self.fail(
            ErrorKind::Mismatch,
            format!(
                "type mismatch: expected {}, found {}",
                self.show(ctx, expected),
                self.show(ctx, found)
            ),
        )
    }

    pub fn equal_val_types<C: CostMonoid>(
        &self,
        ctx: &Context<C>,
        a: &ValType<C>,
        b: &ValType<C>,
    ) -> CheckResult<()> {
        self.val_eq(ctx, a, b).map_err(|e| match e.kind {
            ErrorKind::Mismatch => TypeError {
                message: format!(
                    "type mismatch: expected {}, found {}",
                    self.show(ctx, a),
                    self.show(ctx, b)
                ),
                ..e
            },
            _ => e,
        })
    }

    fn val_eq<C: CostMonoid>(
        &self,
        ctx: &Context<C>,
        a: &ValType<C>,
        b: &ValType<C>,
    ) -> CheckResult<()> {
        match (a, b) {
            (ValType::Nat, ValType::Nat) => Ok(()),
            (ValType::U(x), ValType::U(y)) => self.comp_eq(ctx, x, y),
            (ValType::Sig(a1, b1), ValType::Sig(a2, b2)) => {
                self.val_eq(ctx, a1, a2)?;
                self.val_eq(&ctx.with_var((**a1).clone()), b1, b2)
            }
            (ValType::Eq(a1, l1, r1), ValType::Eq(a2, l2, r2)) => {
                self.val_eq(ctx, a1, a2)?;
                self.equal_terms(ctx, l1, l2, "equality type")?;
                self.equal_terms(ctx, r1, r2, "equality type")
            }
            (ValType::Op(x), ValType::Op(y)) | (ValType::Cl(x), ValType::Cl(y)) => {
                self.val_eq(ctx, x, y)
            }
            _ => self.mismatch(ctx, a, b),
        }
    }

    fn comp_eq<C: CostMonoid>(
        &self,
        ctx: &Context<C>,
        a: &CompType<C>,
        b: &CompType<C>,
    ) -> CheckResult<()> {
        match (a, b) {
            (CompType::F(x), CompType::F(y)) => self.val_eq(ctx, x, y),
            (CompType::Pi(a1, x1), CompType::Pi(a2, x2)) => {
                self.val_eq(ctx, a1, a2)?;
                self.comp_eq(&ctx.with_var((**a1).clone()), x1, x2)
            }
            _ => self.mismatch(ctx, &ValType::u(a.clone()), &ValType::u(b.clone())),
        }
    }

    /// Well-formedness of a value type.
    pub fn check_val_type<C: CostMonoid>(
        &mut self,
        ctx: &Context<C>,
        ty: &ValType<C>,
    ) -> CheckResult<()> {
        match ty {
            ValType::Nat => Ok(()),
            ValType::U(x) => self.check_comp_type(ctx, x),
            ValType::Sig(a, b) => {
                self.check_val_type(ctx, a)?;
                self.check_val_type(&ctx.with_var((**a).clone()), b)
            }
            ValType::Eq(a, l, r) => {
                self.check_val_type(ctx, a)?;
                self.check(ctx, l, a)?;
                self.check(ctx, r, a)
            }
            ValType::Op(a) | ValType::Cl(a) => self.check_val_type(ctx, a),
        }
    }

    pub fn check_comp_type<C: CostMonoid>(
        &mut self,
        ctx: &Context<C>,
        ty: &CompType<C>,
    ) -> CheckResult<()> {
        match ty {
            CompType::F(a) => self.check_val_type(ctx, a),
            CompType::Pi(a, x) => {
                self.check_val_type(ctx, a)?;
                self.check_comp_type(&ctx.with_var((**a).clone()), x)
            }
        }
    }

    fn expect_u<C: CostMonoid>(
        &self,
        ctx: &Context<C>,
        ty: ValType<C>,
        what: &str,
    ) -> CheckResult<CompType<C>> {
        match ty {
            ValType::U(x) => Ok(*x),
            other => self.fail(
                ErrorKind::Polarity,
                format!(
                    "{what} must be a computation, found a value of type {}",
                    self.show(ctx, &other)
                ),
            ),
        }
    }

    fn expect_f<C: CostMonoid>(
        &self,
        ctx: &Context<C>,
        ty: ValType<C>,
        what: &str,
    ) -> CheckResult<ValType<C>> {
        match self.expect_u(ctx, ty, what)? {
            CompType::F(a) => Ok(*a),
            other => self.fail(
                ErrorKind::Mismatch,
                format!(
                    "{what} must have a type `F A`, found {}",
                    self.show(ctx, &ValType::u(other))
                ),
            ),
        }
    }

    fn require_phase<C: CostMonoid>(&self, ctx: &Context<C>, what: &str) -> CheckResult<()> {
        if ctx.has_phase() {
            Ok(())
        } else {
            self.fail(
                ErrorKind::PhaseRequired,
                format!("{what} requires the behavioral phase, which is not assumed here"),
            )
        }
    }

    pub fn infer<C: CostMonoid>(
        &mut self,
        ctx: &Context<C>,
        t: &Term<C>,
    ) -> CheckResult<ValType<C>> {
        match t {
            Term::Var(i) => match ctx.lookup(*i) {
                Some(ty) => Ok(ty),
                None => self.fail(
                    ErrorKind::UnboundVariable,
                    format!("variable #{i} is not bound"),
                ),
            },
            Term::Zero => Ok(ValType::Nat),
            Term::Suc(n) => {
                self.at(0, |c| c.check(ctx, n, &ValType::Nat))?;
                Ok(ValType::Nat)
            }
            Term::Ret(v) => {
                let a = self.at(0, |c| c.infer(ctx, v))?;
                Ok(ValType::comp_f(a))
            }
            Term::Bind(e, f) => {
                let e_ty = self.at(0, |c| c.infer(ctx, e))?;
                let a = self.at(0, |c| c.expect_f(ctx, e_ty, "the bound term"))?;
                let inner = ctx.with_var(a);
                let f_ty = self.at(1, |c| c.infer(&inner, f))?;
                let x = self.at(1, |c| c.expect_u(&inner, f_ty, "the body of bind"))?;
                match ValType::u(x).unshift(1) {
                    Some(ty) => Ok(ty),
                    None => self.fail(
                        ErrorKind::Escape,
                        "the type of the body of bind depends on the bound variable",
                    ),
                }
            }
            Term::Step(_, e) => {
                let ty = self.at(0, |c| c.infer(ctx, e))?;
                let x = self.at(0, |c| c.expect_u(ctx, ty, "the body of step"))?;
                Ok(ValType::u(x))
            }
            Term::Lam(_) => self.fail(
                ErrorKind::CannotInfer,
                "cannot infer the type of a lambda; annotate it with a definition or apply it",
            ),
            Term::Ap(f, a) => self.infer_ap(ctx, f, a),
            Term::Pair(a, b) => {
                let ta = self.at(0, |c| c.infer(ctx, a))?;
                let tb = self.at(1, |c| c.infer(ctx, b))?;
                Ok(ValType::sig(ta, tb.shift(1, 0)))
            }
            Term::Split(p, body) => {
                let p_ty = self.at(0, |c| c.infer(ctx, p))?;
                let ValType::Sig(a, b) = p_ty else {
                    return self.at(0, |c| {
                        c.fail(
                            ErrorKind::Mismatch,
                            format!("split expects a pair, found {}", c.show(ctx, &p_ty)),
                        )
                    });
                };
                let inner = ctx.with_var(*a).with_var(*b);
                let ty = self.at(1, |c| c.infer(&inner, body))?;
                let x = self.at(1, |c| c.expect_u(&inner, ty, "the body of split"))?;
                match ValType::u(x).unshift(2) {
                    Some(ty) => Ok(ty),
                    None => self.fail(
                        ErrorKind::Escape,
                        "the type of the body of split depends on the components",
                    ),
                }
            }
            Term::Refl => self.fail(
                ErrorKind::CannotInfer,
                "cannot infer the type of refl; it needs an expected equality type",
            ),
            Term::Seal(a) => {
                let ty = self.at(0, |c| c.infer(ctx, a))?;
                Ok(ValType::cl(ty))
            }
            Term::Star => {
                self.require_phase(ctx, "`*`")?;
                self.fail(ErrorKind::CannotInfer, "cannot infer the type of `*`")
            }
            Term::PLam(body) => {
                let ty = self.at(0, |c| c.infer(&ctx.with_phase(), body))?;
                Ok(ValType::op(ty))
            }
            Term::PAp(e) => {
                self.require_phase(ctx, "papp")?;
                let ty = self.at(0, |c| c.infer(ctx, e))?;
                match ty {
                    ValType::Op(a) => Ok(*a),
                    other => self.at(0, |c| {
                        c.fail(
                            ErrorKind::Mismatch,
                            format!(
                                "papp expects a value of type `Op A`, found {}",
                                c.show(ctx, &other)
                            ),
                        )
                    }),
                }
            }
            Term::Ind {
                scrutinee,
                motive,
                zero,
                suc,
            } => {
                self.at(0, |c| c.check(ctx, scrutinee, &ValType::Nat))?;
                let with_n = ctx.with_var(ValType::Nat);
                self.check_comp_type(&with_n, motive)?;
                let zero_ty = ValType::u(motive.subst(&Term::Zero));
                self.at(1, |c| c.check(ctx, zero, &zero_ty))?;
                let with_rec = with_n.with_var(ValType::u((**motive).clone()));
                let suc_ty = ValType::u(motive.substitute(&|i| {
                    if i == 0 {
                        Term::suc(Term::Var(1))
                    } else {
                        Term::Var(i + 1)
                    }
                }));
                self.at(2, |c| c.check(&with_rec, suc, &suc_ty))?;
                Ok(ValType::u(motive.subst(scrutinee)))
            }
            Term::UnsealInd {
                scrutinee,
                motive,
                eta,
                star,
            } => {
                let s_ty = self.at(0, |c| c.infer(ctx, scrutinee))?;
                let ValType::Cl(a) = s_ty else {
                    return self.at(0, |c| {
                        c.fail(
                            ErrorKind::Mismatch,
                            format!(
                                "unseal expects a value of type `Cl A`, found {}",
                                c.show(ctx, &s_ty)
                            ),
                        )
                    });
                };
                self.check_comp_type(&ctx.with_var(ValType::cl((*a).clone())), motive)?;
                let with_a = ctx.with_var(*a);
                let eta_ty = ValType::u(motive.substitute(&|i| {
                    if i == 0 {
                        Term::seal(Term::Var(0))
                    } else {
                        Term::Var(i)
                    }
                }));
                self.at(1, |c| c.check(&with_a, eta, &eta_ty))?;
                let phased = ctx.with_phase();
                let star_ty = ValType::u(motive.subst(&Term::Star));
                self.at(2, |c| c.check(&phased, star, &star_ty))?;
                let coherent = with_a.with_phase();
                self.at(1, |c| {
                    c.equal_terms(
                        &coherent,
                        eta,
                        &star.shift(1, 0),
                        "the branches of unseal disagree under the phase",
                    )
                    .map_err(|e| match e.kind {
                        ErrorKind::Mismatch => TypeError {
                            kind: ErrorKind::Incoherent,
                            ..e
                        },
                        _ => e,
                    })
                })?;
                Ok(ValType::u(motive.subst(scrutinee)))
            }
        }
    }

    fn infer_ap<C: CostMonoid>(
        &mut self,
        ctx: &Context<C>,
        f: &Term<C>,
        a: &Term<C>,
    ) -> CheckResult<ValType<C>> {
        let mut head = f;
        let mut depth = Vec::new();
        while let Term::Step(_, inner) = head {
            depth.push(0);
            head = inner;
        }
        if let Term::Lam(body) = head {
            let a_ty = self.at(1, |c| c.infer(ctx, a))?;
            self.path.push(0);
            self.path.extend(&depth);
            self.path.push(0);
            let inner = ctx.with_var(a_ty);
            let body_ty = self.infer(&inner, body)?;
            let x = self.expect_u(&inner, body_ty, "the body of a lambda")?;
            self.path.truncate(self.path.len() - depth.len() - 2);
            return Ok(ValType::u(x.subst(a)));
        }
        let f_ty = self.at(0, |c| c.infer(ctx, f))?;
        let x = self.at(0, |c| c.expect_u(ctx, f_ty, "the applied term"))?;
        match x {
            CompType::Pi(dom, cod) => {
                self.at(1, |c| c.check(ctx, a, &dom))?;
                Ok(ValType::u(cod.subst(a)))
            }
            other => self.at(0, |c| {
                c.fail(
                    ErrorKind::Mismatch,
                    format!(
                        "only functions can be applied, found {}",
                        c.show(ctx, &ValType::u(other))
                    ),
                )
            }),
        }
    }

    pub fn check<C: CostMonoid>(
        &mut self,
        ctx: &Context<C>,
        t: &Term<C>,
        ty: &ValType<C>,
    ) -> CheckResult<()> {
        let is_u = matches!(ty, ValType::U(_));
        if is_computation_former(t) && !is_u {
            return self.fail(
                ErrorKind::Polarity,
                format!(
                    "polarity mismatch: a computation cannot have the value type {}",
                    self.show(ctx, ty)
                ),
            );
        }
        if is_value_former(t) && is_u {
            return self.fail(
                ErrorKind::Polarity,
                format!(
                    "polarity mismatch: a value cannot have the computation type {}",
                    self.show(ctx, ty)
                ),
            );
        }
        match (t, ty) {
            (Term::Lam(body), ValType::U(x)) => match &**x {
                CompType::Pi(a, cod) => {
                    let cod_ty = ValType::u((**cod).clone());
                    self.at(0, |c| c.check(&ctx.with_var((**a).clone()), body, &cod_ty))
                }
                CompType::F(_) => self.fail(
                    ErrorKind::Mismatch,
                    format!("a lambda cannot have type {}", self.show(ctx, ty)),
                ),
            },
            (Term::Ret(v), ValType::U(x)) => match &**x {
                CompType::F(a) => self.at(0, |c| c.check(ctx, v, a)),
                CompType::Pi(..) => self.fail(
                    ErrorKind::Mismatch,
                    format!("ret cannot have the function type {}", self.show(ctx, ty)),
                ),
            },
            (Term::Step(_, e), ValType::U(_)) => self.at(0, |c| c.check(ctx, e, ty)),
            (Term::Bind(e, f), ValType::U(_)) => {
                let e_ty = self.at(0, |c| c.infer(ctx, e))?;
                let a = self.at(0, |c| c.expect_f(ctx, e_ty, "the bound term"))?;
                self.at(1, |c| c.check(&ctx.with_var(a), f, &ty.shift(1, 0)))
            }
            (Term::Split(p, body), ValType::U(_)) => {
                let p_ty = self.at(0, |c| c.infer(ctx, p))?;
                let ValType::Sig(a, b) = p_ty else {
                    return self.at(0, |c| {
                        c.fail(
                            ErrorKind::Mismatch,
                            format!("split expects a pair, found {}", c.show(ctx, &p_ty)),
                        )
                    });
                };
                let inner = ctx.with_var(*a).with_var(*b);
                self.at(1, |c| c.check(&inner, body, &ty.shift(2, 0)))
            }
            (Term::Pair(a, b), ValType::Sig(ta, tb)) => {
                self.at(0, |c| c.check(ctx, a, ta))?;
                let tb = tb.subst(a);
                self.at(1, |c| c.check(ctx, b, &tb))
            }
            (Term::Refl, ValType::Eq(a, l, r)) => {
                self.check(ctx, l, a)?;
                self.check(ctx, r, a)?;
                self.equal_terms(ctx, l, r, "refl needs both sides equal")
            }
            (Term::Seal(a), ValType::Cl(ta)) => self.at(0, |c| c.check(ctx, a, ta)),
            (Term::Star, ValType::Cl(_)) => self.require_phase(ctx, "`*`"),
            (Term::PLam(body), ValType::Op(a)) => {
                self.at(0, |c| c.check(&ctx.with_phase(), body, a))
            }
            (Term::Suc(n), ValType::Nat) => self.at(0, |c| c.check(ctx, n, &ValType::Nat)),
            (Term::Zero, ValType::Nat) => Ok(()),
            (
                Term::Pair(..)
                | Term::Refl
                | Term::Seal(_)
                | Term::Star
                | Term::PLam(_)
                | Term::Suc(_)
                | Term::Zero,
                _,
            ) => {
                let former = match t {
                    Term::Pair(..) => "a pair",
                    Term::Refl => "refl",
                    Term::Seal(_) => "a sealed value",
                    Term::Star => "`*`",
                    Term::PLam(_) => "plam",
                    _ => "a numeral",
                };
                self.fail(
                    ErrorKind::Mismatch,
                    format!("{former} cannot have type {}", self.show(ctx, ty)),
                )
            }
            _ => {
                let found = self.infer(ctx, t)?;
                self.equal_val_types(ctx, ty, &found)
            }
        }
    }
}

/// Checks every declaration and `main`, returning the first error.
pub fn check_file<C: CostMonoid>(
    file: &SourceFile<C>,
    config: &RewriteConfig,
) -> Result<(), FileError> {
    let names = file.names();
    let mut checker = Checker::with_names(*config, &names);
    let mut ctx = Context::new();
    for (i, decl) in file.decls.iter().enumerate() {
        checker.path.clear();
        checker
            .check_val_type(&ctx, &decl.ty)
            .and_then(|_| {
                checker.path.clear();
                checker.check(&ctx, &decl.body, &decl.ty)
            })
            .map_err(|error| FileError {
                decl: Some(i),
                error,
            })?;
        ctx = ctx.with_def(decl.ty.clone(), decl.body.clone());
    }
    checker.path.clear();
    checker
        .check_val_type(&ctx, &file.main.ty)
        .and_then(|_| {
            checker.path.clear();
            checker.check(&ctx, &file.main.body, &file.main.ty)
        })
        .map_err(|error| FileError { decl: None, error })
}

/// Checks a closed term against a closed type.
pub fn check_closed<C: CostMonoid>(
    t: &Term<C>,
    ty: &ValType<C>,
    config: &RewriteConfig,
) -> CheckResult<()> {
    let mut checker = Checker::new(*config);
    let ctx = Context::new();
    checker.check_val_type(&ctx, ty)?;
    checker.path.clear();
    checker.check(&ctx, t, ty)
}

/// Infers the type of a closed term.
pub fn infer_closed<C: CostMonoid>(t: &Term<C>, config: &RewriteConfig) -> CheckResult<ValType<C>> {
    Checker::new(*config).infer(&Context::new(), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::NatAdd;
    use crate::parse::{parse, parse_term, parse_type};

    fn ok(term: &str, ty: &str) {
        let t = parse_term::<NatAdd>(term).unwrap();
        let ty = parse_type::<NatAdd>(ty).unwrap();
        if let Err(e) = check_closed(&t, &ty, &RewriteConfig::default()) {
            panic!("{term} : {e:?}");
        }
    }

    fn err(term: &str, ty: &str) -> TypeError {
        let t = parse_term::<NatAdd>(term).unwrap();
        let ty = parse_type::<NatAdd>(ty).unwrap();
        check_closed(&t, &ty, &RewriteConfig::default()).expect_err(term)
    }

    #[test]
    fn basic_forms() {
        ok("ret 0", "F nat");
        ok("step{2} ret (suc 0)", "F nat");
        ok(r"\x. ret x", "Pi (x : nat) F nat");
        ok("bind x <- ret 1; ret (x, x)", "F (Sig (a : nat) nat)");
        ok("(1, refl)", "Sig (x : nat) eq (nat, x, 1)");
        ok("split (1, 2) as (a, b) in ret b", "F nat");
        ok(r"(\x. ret (suc x)) 3", "F nat");
        ok(r"(step{1} \x. ret (suc x)) 3", "F nat");
        ok("seal 4", "Cl nat");
        ok("plam z. *", "Op (Cl nat)");
        ok("plam z. papp (plam w. 0)", "Op nat");
    }

    #[test]
    fn eliminators() {
        ok(
            "ind 2 at n. F nat { zero => ret 0 | suc m, r => step{1} bind y <- r; ret (suc y) }",
            "F nat",
        );
        ok(
            "ind 2 at n. F (eq (nat, n, n)) { zero => ret refl | suc m, r => ret refl }",
            "F (eq (nat, 2, 2))",
        );
        ok(
            "unseal seal 1 at s. F (Cl nat) { seal a => step{3} ret (seal a) | * z => ret * }",
            "F (Cl nat)",
        );
        ok(
            "unseal seal 1 at s. F nat { seal a => step{3} ret 0 | * z => ret 0 }",
            "F nat",
        );
    }

    #[test]
    fn refl_decides_equations() {
        ok("refl", "eq (nat, 2, suc (suc 0))");
        let e = err("refl", "eq (nat, 1, 2)");
        assert_eq!(e.kind, ErrorKind::Mismatch);
        ok(
            "refl",
            "eq (U (F nat), step{1} step{1} ret 0, step{2} ret 0)",
        );
        let e = err("refl", "eq (U (F nat), step{1} ret 0, ret 0)");
        assert_eq!(e.kind, ErrorKind::Mismatch);
        ok("plam z. refl", "Op (eq (U (F nat), step{1} ret 0, ret 0))");
    }

    #[test]
    fn polarity_errors() {
        assert_eq!(err("ret 0", "nat").kind, ErrorKind::Polarity);
        assert_eq!(err("0", "F nat").kind, ErrorKind::Polarity);
        assert_eq!(err(r"\x. ret x", "nat").kind, ErrorKind::Polarity);
        assert_eq!(err("(0, 0)", "F nat").kind, ErrorKind::Polarity);
    }

    #[test]
    fn phase_errors() {
        assert_eq!(err("*", "Cl nat").kind, ErrorKind::PhaseRequired);
        let e = err("ret (papp (plam z. 0))", "F nat");
        assert_eq!(e.kind, ErrorKind::PhaseRequired);
        assert_eq!(e.path, vec![0]);
    }

    #[test]
    fn incoherent_unseal() {
        let e = err(
            "unseal seal 1 at s. F nat { seal a => ret a | * z => ret 0 }",
            "F nat",
        );
        assert!(matches!(
            e.kind,
            ErrorKind::Incoherent | ErrorKind::UndecidedEquality
        ));
        let e = err(
            "unseal seal 1 at s. F nat { seal a => ret 1 | * z => ret 0 }",
            "F nat",
        );
        assert_eq!(e.kind, ErrorKind::Incoherent);
    }

    #[test]
    fn mismatch_paths() {
        let e = err(
            "bind x <- ret 0; ret (0, refl)",
            "F (Sig (a : nat) eq (nat, a, 1))",
        );
        assert_eq!(e.kind, ErrorKind::Mismatch);
        assert_eq!(e.path, vec![1, 0, 1]);
        let e = err("ret (suc (0, 0))", "F nat");
        assert_eq!(e.path, vec![0, 0]);
    }

    #[test]
    fn inference() {
        let t = parse_term::<NatAdd>("bind x <- ret 1; step{1} ret (suc x)").unwrap();
        let ty = infer_closed(&t, &RewriteConfig::default()).unwrap();
        assert_eq!(ty, ValType::comp_f(ValType::Nat));
        let lam = parse_term::<NatAdd>(r"\x. ret x").unwrap();
        assert_eq!(
            infer_closed(&lam, &RewriteConfig::default())
                .unwrap_err()
                .kind,
            ErrorKind::CannotInfer
        );
    }

    #[test]
    fn definitions_unfold_in_equations() {
        let src = "def two : nat = 2\n\
                   def p : eq (nat, two, suc 1) = refl\n\
                   def double : Pi (x : nat) F nat = \\x. ind x at n. F nat { zero => ret 0 | suc m, r => bind y <- r; ret (suc (suc y)) }\n\
                   main : F (eq (U (F nat), double two, ret 4)) = ret refl";
        let file = parse::<NatAdd>(src).unwrap();
        check_file(&file, &RewriteConfig::default()).unwrap();
    }

    #[test]
    fn file_errors_map_to_spans() {
        let src = "def f : Pi (x : nat) F nat = \\x. ret x\nmain : F nat = f (ret 0)";
        let file = parse::<NatAdd>(src).unwrap();
        let err = check_file(&file, &RewriteConfig::default()).unwrap_err();
        assert_eq!(err.decl, None);
        let d = err.to_diagnostic(&file);
        assert_eq!(&src[d.span.clone()], "ret 0");
        assert_eq!(err.error.kind, ErrorKind::Polarity);
    }
}
