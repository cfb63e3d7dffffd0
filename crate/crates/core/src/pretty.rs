//! Printing kernel terms back to concrete syntax.
//!
//! Bound variables are named `x{depth}`, so output is deterministic and
//! reparses to an alpha-equivalent term.

use crate::cost::CostMonoid;
use crate::parse::SourceFile;
use crate::syntax::{CompType, CostExpr, Term, ValType};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Term,
    App,
    Atom,
}

struct Printer {
    names: Vec<String>,
}

impl Printer {
    fn fresh(&self) -> String {
        let mut name = format!("x{}", self.names.len());
        while self.names.contains(&name) {
            name.push('\'');
        }
        name
    }

    fn name_of(&self, index: usize) -> String {
        match self.names.len().checked_sub(index + 1) {
            Some(k) => self.names[k].clone(),
            None => format!("#{index}"),
        }
    }

    fn under<R>(&mut self, names: &[String], f: impl FnOnce(&mut Self) -> R) -> R {
        let depth = self.names.len();
        self.names.extend(names.iter().cloned());
        let out = f(self);
        self.names.truncate(depth);
        out
    }

    fn term<C: CostMonoid>(&mut self, t: &Term<C>, level: Level) -> String {
        let (text, own) = match t {
            Term::Var(i) => (self.name_of(*i), Level::Atom),
            Term::Zero => ("0".to_owned(), Level::Atom),
            Term::Refl => ("refl".to_owned(), Level::Atom),
            Term::Star => ("*".to_owned(), Level::Atom),
            Term::Suc(a) => (format!("suc {}", self.term(a, Level::Atom)), Level::App),
            Term::Ret(a) => (format!("ret {}", self.term(a, Level::Atom)), Level::App),
            Term::Seal(a) => (format!("seal {}", self.term(a, Level::Atom)), Level::App),
            Term::PAp(a) => (format!("papp {}", self.term(a, Level::Atom)), Level::App),
            Term::Ap(f, a) => (
                format!("{} {}", self.term(f, Level::App), self.term(a, Level::Atom)),
                Level::App,
            ),
            Term::Pair(a, b) => (
                format!(
                    "({}, {})",
                    self.term(a, Level::Term),
                    self.term(b, Level::Term)
                ),
                Level::Atom,
            ),
            Term::Lam(body) => {
                let x = self.fresh();
                let b = self.under(std::slice::from_ref(&x), |p| p.term(body, Level::Term));
                (format!("\\{x}. {b}"), Level::Term)
            }
            Term::PLam(body) => (
                format!("plam _. {}", self.term(body, Level::Term)),
                Level::Term,
            ),
            Term::Step(c, e) => (
                format!("step{{{}}} {}", cost_text(c), self.term(e, Level::Term)),
                Level::Term,
            ),
            Term::Bind(e, body) => {
                let head = self.term(e, Level::Term);
                let x = self.fresh();
                let b = self.under(std::slice::from_ref(&x), |p| p.term(body, Level::Term));
                (format!("bind {x} <- {head}; {b}"), Level::Term)
            }
            Term::Split(p, body) => {
                let head = self.term(p, Level::Term);
                let x = self.fresh();
                let y = self.under(std::slice::from_ref(&x), |p| p.fresh());
                let b = self.under(&[x.clone(), y.clone()], |p| p.term(body, Level::Term));
                (format!("split {head} as ({x}, {y}) in {b}"), Level::Term)
            }
            Term::Ind {
                scrutinee,
                motive,
                zero,
                suc,
            } => {
                let s = self.term(scrutinee, Level::Term);
                let x = self.fresh();
                let m = self.under(std::slice::from_ref(&x), |p| p.comp(motive));
                let z = self.term(zero, Level::Term);
                let pred = self.fresh();
                let rec = self.under(std::slice::from_ref(&pred), |p| p.fresh());
                let b = self.under(&[pred.clone(), rec.clone()], |p| p.term(suc, Level::Term));
                (
                    format!("ind {s} at {x}. {m} {{ zero => {z} | suc {pred}, {rec} => {b} }}"),
                    Level::Atom,
                )
            }
            Term::UnsealInd {
                scrutinee,
                motive,
                eta,
                star,
            } => {
                let s = self.term(scrutinee, Level::Term);
                let x = self.fresh();
                let m = self.under(std::slice::from_ref(&x), |p| p.comp(motive));
                let a = self.fresh();
                let e = self.under(std::slice::from_ref(&a), |p| p.term(eta, Level::Term));
                let st = self.term(star, Level::Term);
                (
                    format!("unseal {s} at {x}. {m} {{ seal {a} => {e} | * _ => {st} }}"),
                    Level::Atom,
                )
            }
        };
        if own < level {
            format!("({text})")
        } else {
            text
        }
    }

    fn val<C: CostMonoid>(&mut self, ty: &ValType<C>) -> String {
        match ty {
            ValType::Nat => "nat".to_owned(),
            ValType::U(x) => format!("U ({})", self.comp(x)),
            ValType::Sig(a, b) => {
                let a = self.val(a);
                let x = self.fresh();
                let b = self.under(std::slice::from_ref(&x), |p| p.val(b));
                format!("Sig ({x} : {a}) {b}")
            }
            ValType::Eq(a, l, r) => format!(
                "eq ({}, {}, {})",
                self.val(a),
                self.term(l, Level::Term),
                self.term(r, Level::Term)
            ),
            ValType::Op(a) => format!("Op {}", self.val(a)),
            ValType::Cl(a) => format!("Cl {}", self.val(a)),
        }
    }

    fn comp<C: CostMonoid>(&mut self, ty: &CompType<C>) -> String {
        match ty {
            CompType::F(a) => {
                let inner = self.val(a);
                if matches!(**a, ValType::Nat) {
                    format!("F {inner}")
                } else {
                    format!("F ({inner})")
                }
            }
            CompType::Pi(a, x) => {
                let a = self.val(a);
                let n = self.fresh();
                let body = self.under(std::slice::from_ref(&n), |p| p.comp(x));
                format!("Pi ({n} : {a}) {body}")
            }
        }
    }
}

fn cost_text<C: CostMonoid>(c: &CostExpr<C>) -> String {
    match c {
        CostExpr::Lit(c) => c.render(),
        CostExpr::Zero => C::mzero().render(),
        CostExpr::Add(a, b) => format!("{} + {}", cost_text(a), cost_text(b)),
    }
}

/// Renders a closed term.
pub fn term<C: CostMonoid>(t: &Term<C>) -> String {
    term_in(t, &[])
}

/// Renders a term whose free variables are `names` (outermost first).
pub fn term_in<C: CostMonoid>(t: &Term<C>, names: &[String]) -> String {
    Printer {
        names: names.to_vec(),
    }
    .term(t, Level::Term)
}

pub fn val_type<C: CostMonoid>(ty: &ValType<C>) -> String {
    val_type_in(ty, &[])
}

pub fn val_type_in<C: CostMonoid>(ty: &ValType<C>, names: &[String]) -> String {
    Printer {
        names: names.to_vec(),
    }
    .val(ty)
}

pub fn comp_type<C: CostMonoid>(ty: &CompType<C>) -> String {
    comp_type_in(ty, &[])
}

pub fn comp_type_in<C: CostMonoid>(ty: &CompType<C>, names: &[String]) -> String {
    Printer {
        names: names.to_vec(),
    }
    .comp(ty)
}

/// Renders a declaration type, writing `U X` as `X`.
pub fn decl_type_in<C: CostMonoid>(ty: &ValType<C>, names: &[String]) -> String {
    match ty {
        ValType::U(x) => comp_type_in(x, names),
        other => val_type_in(other, names),
    }
}

/// Renders a whole program.
pub fn source_file<C: CostMonoid>(file: &SourceFile<C>) -> String {
    let mut out = String::new();
    let mut names = Vec::new();
    for decl in &file.decls {
        out.push_str(&format!(
            "def {} : {} =\n  {}\n\n",
            decl.name,
            decl_type_in(&decl.ty, &names),
            term_in(&decl.body, &names)
        ));
        names.push(decl.name.clone());
    }
    out.push_str(&format!(
        "main : {} =\n  {}\n",
        comp_type_in(file.main_type(), &names),
        term_in(&file.main.body, &names)
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{NatAdd, NatMax};
    use crate::parse::{parse, parse_term, parse_type};
    use crate::syntax::{alpha_eq, numeral, val_alpha_eq};

    type T = Term<NatAdd>;

    #[test]
    fn identity_lambda() {
        let t: T = Term::lam(Term::ret(Term::Var(0)));
        assert_eq!(term(&t), "\\x0. ret x0");
    }

    #[test]
    fn step_and_numerals() {
        let t: T = Term::step(NatAdd(3), Term::ret(numeral(2)));
        assert_eq!(term(&t), "step{3} ret (suc (suc 0))");
        assert_eq!(term::<NatAdd>(&numeral(0)), "0");
    }

    #[test]
    fn nested_binders_use_depth_names() {
        let t: T = Term::bind(
            Term::ret(numeral(1)),
            Term::bind(
                Term::ret(Term::Var(0)),
                Term::ret(Term::pair(Term::Var(1), Term::Var(0))),
            ),
        );
        assert_eq!(
            term(&t),
            "bind x0 <- ret (suc 0); bind x1 <- ret x0; ret (x0, x1)"
        );
    }

    #[test]
    fn binder_forms_in_argument_position() {
        let t: T = Term::ap(Term::lam(Term::ret(Term::Var(0))), Term::suc(Term::Zero));
        assert_eq!(term(&t), "(\\x0. ret x0) (suc 0)");
        let t: T = Term::ap(
            Term::ap(Term::Var(0), Term::Var(0)),
            Term::ap(Term::Var(0), Term::Var(0)),
        );
        assert_eq!(term_in(&t, &["f".to_owned()]), "f f (f f)");
    }

    #[test]
    fn avoids_capturing_definition_names() {
        let t: T = Term::lam(Term::ret(Term::Var(1)));
        assert_eq!(term_in(&t, &["x1".to_owned()]), "\\x1'. ret x1");
    }

    #[test]
    fn types_render() {
        let ty: ValType<NatAdd> = ValType::u(CompType::pi(
            ValType::Nat,
            CompType::f(ValType::eq(ValType::Nat, Term::Var(0), numeral(1))),
        ));
        assert_eq!(val_type(&ty), "U (Pi (x0 : nat) F (eq (nat, x0, suc 0)))");
    }

    #[test]
    fn cost_annotations_render_in_model_syntax() {
        let t: Term<(NatAdd, NatMax)> = Term::step((NatAdd(2), NatMax(5)), Term::ret(Term::Zero));
        assert_eq!(term(&t), "step{(2,5)} ret 0");
    }

    #[test]
    fn roundtrip_samples() {
        let samples = [
            r"\x. \y. bind z <- x y; ret (suc z)",
            "ind 3 at n. F nat { zero => ret 0 | suc m, r => step{1} bind y <- r; ret (suc y) }",
            "unseal seal 1 at s. F (Cl nat) { seal a => step{2} ret (seal a) | * z => ret * }",
            "split (1, 2) as (a, b) in ret (b, a)",
            "plam u. papp (plam v. ret 0)",
            "(\\f. f 1) (\\x. ret x)",
            "step{1 + 2} step{0} ret refl",
        ];
        for src in samples {
            let t: T = parse_term(src).unwrap();
            let printed = term(&t);
            let again: T = parse_term(&printed).unwrap_or_else(|e| panic!("{printed}: {e:?}"));
            assert!(alpha_eq(&t, &again), "{src} => {printed}");
        }
        let ty: ValType<NatAdd> = parse_type("Sig (x : nat) Op (eq (nat, x, x))").unwrap();
        let again: ValType<NatAdd> = parse_type(&val_type(&ty)).unwrap();
        assert!(val_alpha_eq(&ty, &again));
    }

    #[test]
    fn program_roundtrip() {
        let src =
            "def one : nat = 1\ndef id : Pi (x : nat) F nat = \\x. ret x\nmain : F nat = id one";
        let file = parse::<NatAdd>(src).unwrap();
        let printed = source_file(&file);
        let again = parse::<NatAdd>(&printed).unwrap();
        assert_eq!(file.decls.len(), again.decls.len());
        assert!(alpha_eq(&file.main.body, &again.main.body));
        assert!(printed.contains("def id : Pi (x1 : nat) F nat ="));
    }
}
