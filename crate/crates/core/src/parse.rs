//! Concrete syntax: lexing, parsing and name resolution.
//!
//! ```text
//! program := decl* main
//! decl    := "def" IDENT ":" type "=" term
//! main    := "main" ":" ctype "=" term
//! vtype   := "nat" | "U" ctype | "Sig" "(" IDENT ":" vtype ")" vtype
//!          | "eq" "(" vtype "," term "," term ")" | "Op" vtype | "Cl" vtype | "(" vtype ")"
//! ctype   := "F" vtype | "Pi" "(" IDENT ":" vtype ")" ctype | "(" ctype ")"
//! term    := "\" IDENT "." term | "bind" IDENT "<-" term ";" term
//!          | "step" "{" COST "}" term | "split" term "as" "(" IDENT "," IDENT ")" "in" term
//!          | "plam" IDENT "." term | app
//! app     := unary unary*
//! unary   := ("suc" | "ret" | "seal" | "papp") unary | atom
//! atom    := IDENT | NAT | "refl" | "*" | "(" term ")" | "(" term "," term ")"
//!          | "unseal" term "at" IDENT "." ctype "{" "seal" IDENT "=>" term "|" "*" IDENT "=>" term "}"
//!          | "ind" term "at" IDENT "." ctype "{" "zero" "=>" term "|" "suc" IDENT "," IDENT "=>" term "}"
//! ```
//!
//! Names are resolved to de Bruijn indices while parsing. Every term node
//! gets a [`SpanTree`] entry so that checker errors, which are located by
//! child path, can be mapped back to source ranges.

use std::collections::HashSet;
use std::fmt;
use std::ops::Range;

use crate::cost::CostMonoid;
use crate::syntax::{numeral, CompType, CostExpr, Term, ValType};

pub type Span = Range<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Span,
    pub message: String,
    pub hint: Option<String>,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            span,
            message: message.into(),
            hint: None,
        }
    }

    pub fn with_hint(mut self, hint: impl Into<String>) -> Self {
        self.hint = Some(hint.into());
        self
    }

    /// `file:line:col: error: message` followed by the offending line and a caret.
    pub fn render(&self, file: &str, source: &str) -> String {
        let start = self.span.start.min(source.len());
        let end = self.span.end.clamp(start, source.len());
        let line_start = source[..start].rfind('\n').map_or(0, |i| i + 1);
        let line_end = source[start..]
            .find('\n')
            .map_or(source.len(), |i| start + i);
        let line_no = source[..start].matches('\n').count() + 1;
        let col = source[line_start..start].chars().count() + 1;
        let width = source[start..end.min(line_end)].chars().count().max(1);
        let severity = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let mut out = format!(
            "{file}:{line_no}:{col}: {severity}: {}\n  --> bytes {}..{}\n   | {}\n   | {}{}",
            self.message,
            self.span.start,
            self.span.end,
            &source[line_start..line_end],
            " ".repeat(col - 1),
            "^".repeat(width)
        );
        if let Some(hint) = &self.hint {
            out.push_str(&format!("\n   = hint: {hint}"));
        }
        out
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {}..{}",
            self.message, self.span.start, self.span.end
        )
    }
}

/// Source ranges of a term and, in `children()` order, of its subterms.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SpanTree {
    pub span: Span,
    pub children: Vec<SpanTree>,
}

impl SpanTree {
    fn leaf(span: Span) -> Self {
        SpanTree {
            span,
            children: Vec::new(),
        }
    }

    fn node(span: Span, children: Vec<SpanTree>) -> Self {
        SpanTree { span, children }
    }

    /// The span of the deepest recorded node along `path`.
    pub fn locate(&self, path: &[usize]) -> Span {
        let mut cur = self;
        for &i in path {
            match cur.children.get(i) {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur.span.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl<C> {
    pub name: String,
    /// Computation types are stored as `U X`.
    pub ty: ValType<C>,
    pub body: Term<C>,
    pub name_span: Span,
    pub type_span: Span,
    pub spans: SpanTree,
}

/// A parsed program. Declaration `i` is in the scope of declarations
/// `0..i`, the most recent at index 0; `main` sees all of them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceFile<C> {
    pub decls: Vec<Decl<C>>,
    pub main: Decl<C>,
}

impl<C: CostMonoid> SourceFile<C> {
    pub fn main_type(&self) -> &CompType<C> {
        match &self.main.ty {
            ValType::U(x) => x,
            _ => unreachable!("main is parsed at a computation type"),
        }
    }

    /// `main` with every definition inlined.
    pub fn closed_main(&self) -> Term<C> {
        self.close(&self.main.body, self.decls.len())
    }

    /// A term in the scope of the first `visible` declarations, made closed.
    pub fn close(&self, term: &Term<C>, visible: usize) -> Term<C> {
        let mut closed = term.clone();
        // most recent declaration first
        for k in (0..visible).rev() {
            let value = self.close(&self.decls[k].body, k);
            closed = closed.subst(&value);
        }
        closed
    }

    pub fn names(&self) -> Vec<String> {
        self.decls.iter().map(|d| d.name.clone()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kw {
    Def,
    Main,
    Nat,
    U,
    Sig,
    Eq,
    Op,
    Cl,
    F,
    Pi,
    Suc,
    Ret,
    Bind,
    Step,
    Split,
    As,
    In,
    Refl,
    Seal,
    Unseal,
    At,
    PLam,
    PApp,
    Ind,
    Zero,
}

impl Kw {
    fn from_ident(s: &str) -> Option<Kw> {
        Some(match s {
            "def" => Kw::Def,
            "main" => Kw::Main,
            "nat" => Kw::Nat,
            "U" => Kw::U,
            "Sig" => Kw::Sig,
            "eq" => Kw::Eq,
            "Op" => Kw::Op,
            "Cl" => Kw::Cl,
            "F" => Kw::F,
            "Pi" => Kw::Pi,
            "suc" => Kw::Suc,
            "ret" => Kw::Ret,
            "bind" => Kw::Bind,
            "step" => Kw::Step,
            "split" => Kw::Split,
            "as" => Kw::As,
            "in" => Kw::In,
            "refl" => Kw::Refl,
            "seal" => Kw::Seal,
            "unseal" => Kw::Unseal,
            "at" => Kw::At,
            "plam" => Kw::PLam,
            "papp" => Kw::PApp,
            "ind" => Kw::Ind,
            "zero" => Kw::Zero,
            _ => return None,
        })
    }
}

pub fn is_keyword(s: &str) -> bool {
    Kw::from_ident(s).is_some()
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Nat(u64),
    Kw(Kw),
    Colon,
    Equals,
    LParen,
    RParen,
    Comma,
    Dot,
    Backslash,
    LArrow,
    Semi,
    LBrace,
    RBrace,
    Bar,
    FatArrow,
    Star,
    Cost(String),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Nat(n) => write!(f, "number `{n}`"),
            Tok::Kw(k) => write!(f, "keyword `{}`", format!("{k:?}").to_lowercase()),
            Tok::Colon => f.write_str("`:`"),
            Tok::Equals => f.write_str("`=`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Backslash => f.write_str("`\\`"),
            Tok::LArrow => f.write_str("`<-`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Bar => f.write_str("`|`"),
            Tok::FatArrow => f.write_str("`=>`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Cost(c) => write!(f, "cost `{{{c}}}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(source: &str) -> Result<Vec<(Tok, Span)>, Diagnostic> {
    let bytes = source.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if source[i..].starts_with("--") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
            {
                i += 1;
            }
            let word = &source[start..i];
            let tok = match Kw::from_ident(word) {
                Some(kw) => Tok::Kw(kw),
                None => Tok::Ident(word.to_owned()),
            };
            let is_step = tok == Tok::Kw(Kw::Step);
            toks.push((tok, start..i));
            if is_step {
                let mut j = i;
                while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                    j += 1;
                }
                if j < bytes.len() && bytes[j] == b'{' {
                    let close = source[j..].find('}').map(|k| j + k).ok_or_else(|| {
                        Diagnostic::error(j..source.len(), "unterminated cost annotation")
                    })?;
                    toks.push((Tok::Cost(source[j + 1..close].to_owned()), j..close + 1));
                    i = close + 1;
                }
            }
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = source[start..i]
                .parse::<u64>()
                .map_err(|_| Diagnostic::error(start..i, "numeric literal out of range"))?;
            toks.push((Tok::Nat(n), start..i));
            continue;
        }
        let two = source.get(i..i + 2);
        let (tok, len) = match (c, two) {
            (_, Some("<-")) => (Tok::LArrow, 2),
            (_, Some("=>")) => (Tok::FatArrow, 2),
            (b':', _) => (Tok::Colon, 1),
            (b'=', _) => (Tok::Equals, 1),
            (b'(', _) => (Tok::LParen, 1),
            (b')', _) => (Tok::RParen, 1),
            (b',', _) => (Tok::Comma, 1),
            (b'.', _) => (Tok::Dot, 1),
            (b'\\', _) => (Tok::Backslash, 1),
            (b';', _) => (Tok::Semi, 1),
            (b'{', _) => (Tok::LBrace, 1),
            (b'}', _) => (Tok::RBrace, 1),
            (b'|', _) => (Tok::Bar, 1),
            (b'*', _) => (Tok::Star, 1),
            _ => {
                let ch = source[i..].chars().next().unwrap_or('?');
                return Err(Diagnostic::error(
                    i..i + ch.len_utf8(),
                    format!("unexpected character `{ch}`"),
                ));
            }
        };
        i += len;
        toks.push((tok, start..i));
    }
    toks.push((Tok::Eof, source.len()..source.len()));
    Ok(toks)
}

/// Parses a cost annotation body: monoid literals joined by `+`.
pub fn parse_cost<C: CostMonoid>(text: &str) -> Result<CostExpr<C>, String> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut last = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '+' if depth == 0 => {
                parts.push(&text[last..i]);
                last = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[last..]);
    let mut expr: Option<CostExpr<C>> = None;
    for part in parts {
        let lit = CostExpr::Lit(C::parse_elem(part).map_err(|e| e.to_string())?);
        expr = Some(match expr {
            None => lit,
            Some(prev) => CostExpr::sum(prev, lit),
        });
    }
    expr.ok_or_else(|| "empty cost annotation".to_owned())
}

enum AnyType<C> {
    Val(ValType<C>),
    Comp(CompType<C>),
}

struct Parser<'s, C> {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    scope: Vec<String>,
    errors: Vec<Diagnostic>,
    _src: &'s str,
    _marker: std::marker::PhantomData<C>,
}

type PResult<T> = Result<T, Diagnostic>;

impl<'s, C: CostMonoid> Parser<'s, C> {
    fn new(source: &'s str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(source)?,
            pos: 0,
            scope: Vec::new(),
            errors: Vec::new(),
            _src: source,
            _marker: std::marker::PhantomData,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1.clone()
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].1.end
        }
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().1)
        } else {
            Err(Diagnostic::error(
                self.span(),
                format!("expected {tok} {what}, found {}", self.peek()),
            ))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().1;
                Ok((name, span))
            }
            other => Err(Diagnostic::error(
                self.span(),
                format!("expected {what}, found {other}"),
            )),
        }
    }

    fn with_binders<T>(
        &mut self,
        names: &[String],
        f: impl FnOnce(&mut Self) -> PResult<T>,
    ) -> PResult<T> {
        let depth = self.scope.len();
        self.scope.extend(names.iter().cloned());
        let out = f(self);
        self.scope.truncate(depth);
        out
    }

    fn resolve(&mut self, name: &str, span: Span) -> Term<C> {
        match self.scope.iter().rev().position(|n| n == name) {
            Some(i) => Term::Var(i),
            None => {
                self.errors.push(
                    Diagnostic::error(span, format!("unbound identifier {name}")).with_hint(
                        "names must be bound by an enclosing binder or an earlier `def`",
                    ),
                );
                Term::Zero
            }
        }
    }

    fn program(&mut self) -> PResult<SourceFile<C>> {
        let mut decls: Vec<Decl<C>> = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        while self.eat(&Tok::Kw(Kw::Def)) {
            let (name, name_span) = self.ident("a declaration name")?;
            self.expect(Tok::Colon, "after the declaration name")?;
            let ty_start = self.span().start;
            let ty = match self.any_type()? {
                AnyType::Val(v) => v,
                AnyType::Comp(x) => ValType::u(x),
            };
            let type_span = ty_start..self.prev_end();
            self.expect(Tok::Equals, "before the declaration body")?;
            let (body, spans) = self.term()?;
            if !seen.insert(name.clone()) {
                self.errors.push(Diagnostic::error(
                    name_span.clone(),
                    format!("duplicate declaration {name}"),
                ));
            }
            self.scope.push(name.clone());
            decls.push(Decl {
                name,
                ty,
                body,
                name_span,
                type_span,
                spans,
            });
        }
        let main_span = self.expect(
            Tok::Kw(Kw::Main),
            "(every program ends with `main : <type> = <term>`)",
        )?;
        self.expect(Tok::Colon, "after `main`")?;
        let ty_start = self.span().start;
        let ty = self.comp_type()?;
        let type_span = ty_start..self.prev_end();
        self.expect(Tok::Equals, "before the body of main")?;
        let (body, spans) = self.term()?;
        if *self.peek() != Tok::Eof {
            return Err(Diagnostic::error(
                self.span(),
                format!("expected end of input after main, found {}", self.peek()),
            ));
        }
        Ok(SourceFile {
            decls,
            main: Decl {
                name: "main".to_owned(),
                ty: ValType::u(ty),
                body,
                name_span: main_span,
                type_span,
                spans,
            },
        })
    }

    fn any_type(&mut self) -> PResult<AnyType<C>> {
        match self.peek() {
            Tok::Kw(Kw::F) | Tok::Kw(Kw::Pi) => Ok(AnyType::Comp(self.comp_type()?)),
            Tok::LParen => {
                self.bump();
                let inner = self.any_type()?;
                self.expect(Tok::RParen, "to close the type")?;
                Ok(inner)
            }
            _ => Ok(AnyType::Val(self.val_type()?)),
        }
    }

    fn comp_type(&mut self) -> PResult<CompType<C>> {
        let span = self.span();
        match self.any_type_head()? {
            AnyType::Comp(x) => Ok(x),
            AnyType::Val(_) => Err(Diagnostic::error(
                span.start..self.prev_end(),
                "expected a computation type (`F A` or `Pi (x : A) X`), found a value type",
            )
            .with_hint("wrap a value type as `F A` to describe a computation returning it")),
        }
    }

    fn val_type(&mut self) -> PResult<ValType<C>> {
        let span = self.span();
        match self.any_type_head()? {
            AnyType::Val(v) => Ok(v),
            AnyType::Comp(_) => Err(Diagnostic::error(
                span.start..self.prev_end(),
                "expected a value type, found a computation type",
            )
            .with_hint("use `U X` for the type of suspended computations")),
        }
    }

    fn any_type_head(&mut self) -> PResult<AnyType<C>> {
        let (tok, span) = self.bump();
        Ok(match tok {
            Tok::Kw(Kw::Nat) => AnyType::Val(ValType::Nat),
            Tok::Kw(Kw::U) => AnyType::Val(ValType::u(self.comp_type()?)),
            Tok::Kw(Kw::Op) => AnyType::Val(ValType::op(self.val_type()?)),
            Tok::Kw(Kw::Cl) => AnyType::Val(ValType::cl(self.val_type()?)),
            Tok::Kw(Kw::Sig) => {
                self.expect(Tok::LParen, "after `Sig`")?;
                let (name, _) = self.ident("a binder name")?;
                self.expect(Tok::Colon, "in the `Sig` binder")?;
                let a = self.val_type()?;
                self.expect(Tok::RParen, "to close the `Sig` binder")?;
                let b = self.with_binders(&[name], |p| p.val_type())?;
                AnyType::Val(ValType::sig(a, b))
            }
            Tok::Kw(Kw::Eq) => {
                self.expect(Tok::LParen, "after `eq`")?;
                let a = self.val_type()?;
                self.expect(Tok::Comma, "after the type of `eq`")?;
                let (l, _) = self.term()?;
                self.expect(Tok::Comma, "between the sides of `eq`")?;
                let (r, _) = self.term()?;
                self.expect(Tok::RParen, "to close `eq`")?;
                AnyType::Val(ValType::eq(a, l, r))
            }
            Tok::Kw(Kw::F) => AnyType::Comp(CompType::f(self.val_type()?)),
            Tok::Kw(Kw::Pi) => {
                self.expect(Tok::LParen, "after `Pi`")?;
                let (name, _) = self.ident("a binder name")?;
                self.expect(Tok::Colon, "in the `Pi` binder")?;
                let a = self.val_type()?;
                self.expect(Tok::RParen, "to close the `Pi` binder")?;
                let x = self.with_binders(&[name], |p| p.comp_type())?;
                AnyType::Comp(CompType::pi(a, x))
            }
            Tok::LParen => {
                let inner = self.any_type()?;
                self.expect(Tok::RParen, "to close the type")?;
                inner
            }
            other => {
                return Err(Diagnostic::error(
                    span,
                    format!("expected a type, found {other}"),
                ));
            }
        })
    }

    fn term(&mut self) -> PResult<(Term<C>, SpanTree)> {
        let start = self.span().start;
        match self.peek().clone() {
            Tok::Backslash => {
                self.bump();
                let (name, _) = self.ident("a parameter name")?;
                self.expect(Tok::Dot, "after the parameter")?;
                let (body, bs) = self.with_binders(&[name], |p| p.term())?;
                Ok((
                    Term::lam(body),
                    SpanTree::node(start..self.prev_end(), vec![bs]),
                ))
            }
            Tok::Kw(Kw::PLam) => {
                self.bump();
                self.ident("a phase binder name")?;
                self.expect(Tok::Dot, "after the phase binder")?;
                let (body, bs) = self.term()?;
                Ok((
                    Term::plam(body),
                    SpanTree::node(start..self.prev_end(), vec![bs]),
                ))
            }
            Tok::Kw(Kw::Bind) => {
                self.bump();
                let (name, _) = self.ident("a variable name")?;
                self.expect(Tok::LArrow, "after the bound name")?;
                let (e, es) = self.term()?;
                self.expect(Tok::Semi, "after the bound computation")?;
                let (body, bs) = self.with_binders(&[name], |p| p.term())?;
                Ok((
                    Term::bind(e, body),
                    SpanTree::node(start..self.prev_end(), vec![es, bs]),
                ))
            }
            Tok::Kw(Kw::Step) => {
                self.bump();
                let (tok, cost_span) = self.bump();
                let Tok::Cost(text) = tok else {
                    return Err(Diagnostic::error(
                        cost_span,
                        "expected `{cost}` after `step`",
                    ));
                };
                let cost = parse_cost::<C>(&text).map_err(|msg| {
                    Diagnostic::error(cost_span.clone(), msg)
                        .with_hint(format!("the active cost model is {}", C::model_name()))
                })?;
                let (body, bs) = self.term()?;
                Ok((
                    Term::step_expr(cost, body),
                    SpanTree::node(start..self.prev_end(), vec![bs]),
                ))
            }
            Tok::Kw(Kw::Split) => {
                self.bump();
                let (p, ps) = self.term()?;
                self.expect(Tok::Kw(Kw::As), "after the scrutinee of `split`")?;
                self.expect(Tok::LParen, "before the pattern")?;
                let (x, _) = self.ident("a variable name")?;
                self.expect(Tok::Comma, "in the pattern")?;
                let (y, _) = self.ident("a variable name")?;
                self.expect(Tok::RParen, "to close the pattern")?;
                self.expect(Tok::Kw(Kw::In), "after the pattern")?;
                let (body, bs) = self.with_binders(&[x, y], |p| p.term())?;
                Ok((
                    Term::split(p, body),
                    SpanTree::node(start..self.prev_end(), vec![ps, bs]),
                ))
            }
            _ => self.app(),
        }
    }

    fn starts_unary(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_)
                | Tok::Nat(_)
                | Tok::Star
                | Tok::LParen
                | Tok::Kw(Kw::Refl)
                | Tok::Kw(Kw::Unseal)
                | Tok::Kw(Kw::Ind)
                | Tok::Kw(Kw::Suc)
                | Tok::Kw(Kw::Ret)
                | Tok::Kw(Kw::Seal)
                | Tok::Kw(Kw::PApp)
        )
    }

    fn app(&mut self) -> PResult<(Term<C>, SpanTree)> {
        let start = self.span().start;
        let (mut f, mut fs) = self.unary()?;
        while self.starts_unary() {
            let (a, as_) = self.unary()?;
            f = Term::ap(f, a);
            fs = SpanTree::node(start..self.prev_end(), vec![fs, as_]);
        }
        Ok((f, fs))
    }

    fn unary(&mut self) -> PResult<(Term<C>, SpanTree)> {
        let start = self.span().start;
        let wrap: fn(Term<C>) -> Term<C> = match self.peek() {
            Tok::Kw(Kw::Suc) => Term::suc,
            Tok::Kw(Kw::Ret) => Term::ret,
            Tok::Kw(Kw::Seal) => Term::seal,
            Tok::Kw(Kw::PApp) => Term::pap,
            _ => return self.atom(),
        };
        self.bump();
        let (t, ts) = self.unary()?;
        Ok((wrap(t), SpanTree::node(start..self.prev_end(), vec![ts])))
    }

    fn atom(&mut self) -> PResult<(Term<C>, SpanTree)> {
        let (tok, span) = self.bump();
        let start = span.start;
        match tok {
            Tok::Ident(name) => Ok((self.resolve(&name, span.clone()), SpanTree::leaf(span))),
            Tok::Nat(n) => Ok((numeral(n), SpanTree::leaf(span))),
            Tok::Kw(Kw::Refl) => Ok((Term::Refl, SpanTree::leaf(span))),
            Tok::Star => Ok((Term::Star, SpanTree::leaf(span))),
            Tok::LParen => {
                let (a, as_) = self.term()?;
                if self.eat(&Tok::Comma) {
                    let (b, bs) = self.term()?;
                    self.expect(Tok::RParen, "to close the pair")?;
                    Ok((
                        Term::pair(a, b),
                        SpanTree::node(start..self.prev_end(), vec![as_, bs]),
                    ))
                } else {
                    self.expect(Tok::RParen, "to close the parenthesis")?;
                    Ok((a, as_))
                }
            }
            Tok::Kw(Kw::Ind) => {
                let (scrut, ss) = self.term()?;
                self.expect(Tok::Kw(Kw::At), "before the motive of `ind`")?;
                let (x, _) = self.ident("a motive binder")?;
                self.expect(Tok::Dot, "after the motive binder")?;
                let motive = self.with_binders(&[x], |p| p.comp_type())?;
                self.expect(Tok::LBrace, "to open the branches of `ind`")?;
                self.expect(
                    Tok::Kw(Kw::Zero),
                    "(the first branch of `ind` is `zero => ...`)",
                )?;
                self.expect(Tok::FatArrow, "after `zero`")?;
                let (z, zs) = self.term()?;
                self.expect(Tok::Bar, "between the branches")?;
                self.expect(
                    Tok::Kw(Kw::Suc),
                    "(the second branch of `ind` is `suc n, r => ...`)",
                )?;
                let (m, _) = self.ident("the predecessor name")?;
                self.expect(
                    Tok::Comma,
                    "between the predecessor and the recursive result",
                )?;
                let (r, _) = self.ident("the recursive result name")?;
                self.expect(Tok::FatArrow, "after the `suc` pattern")?;
                let (s, sus) = self.with_binders(&[m, r], |p| p.term())?;
                self.expect(Tok::RBrace, "to close the branches of `ind`")?;
                Ok((
                    Term::ind(scrut, motive, z, s),
                    SpanTree::node(start..self.prev_end(), vec![ss, zs, sus]),
                ))
            }
            Tok::Kw(Kw::Unseal) => {
                let (scrut, ss) = self.term()?;
                self.expect(Tok::Kw(Kw::At), "before the motive of `unseal`")?;
                let (x, _) = self.ident("a motive binder")?;
                self.expect(Tok::Dot, "after the motive binder")?;
                let motive = self.with_binders(&[x], |p| p.comp_type())?;
                self.expect(Tok::LBrace, "to open the branches of `unseal`")?;
                self.expect(
                    Tok::Kw(Kw::Seal),
                    "(the first branch of `unseal` is `seal a => ...`)",
                )?;
                let (a, _) = self.ident("a variable name")?;
                self.expect(Tok::FatArrow, "after the `seal` pattern")?;
                let (eta, es) = self.with_binders(&[a], |p| p.term())?;
                self.expect(Tok::Bar, "between the branches")?;
                self.expect(Tok::Star, "(the second branch of `unseal` is `* z => ...`)")?;
                self.ident("a phase binder name")?;
                self.expect(Tok::FatArrow, "after the `*` pattern")?;
                let (star, ts) = self.term()?;
                self.expect(Tok::RBrace, "to close the branches of `unseal`")?;
                Ok((
                    Term::unseal(scrut, motive, eta, star),
                    SpanTree::node(start..self.prev_end(), vec![ss, es, ts]),
                ))
            }
            other => Err(Diagnostic::error(
                span,
                format!("expected a term, found {other}"),
            )),
        }
    }

    fn finish<T>(self, result: PResult<T>) -> Result<T, Vec<Diagnostic>> {
        let mut errors = self.errors;
        match result {
            Ok(v) if errors.is_empty() => Ok(v),
            Ok(_) => Err(errors),
            Err(e) => {
                errors.push(e);
                errors.sort_by_key(|d| d.span.start);
                Err(errors)
            }
        }
    }
}

/// Parses a whole program.
pub fn parse<C: CostMonoid>(source: &str) -> Result<SourceFile<C>, Vec<Diagnostic>> {
    let mut parser = Parser::<C>::new(source).map_err(|d| vec![d])?;
    let result = parser.program();
    parser.finish(result)
}

/// Parses a closed term.
pub fn parse_term<C: CostMonoid>(source: &str) -> Result<Term<C>, Vec<Diagnostic>> {
    parse_term_in::<C>(source, &[])
}

/// Parses a term in a scope of names (outermost first).
pub fn parse_term_in<C: CostMonoid>(
    source: &str,
    names: &[String],
) -> Result<Term<C>, Vec<Diagnostic>> {
    let mut parser = Parser::<C>::new(source).map_err(|d| vec![d])?;
    parser.scope = names.to_vec();
    let result = parser.term().and_then(|(t, _)| match parser.peek() {
        Tok::Eof => Ok(t),
        other => Err(Diagnostic::error(
            parser.span(),
            format!("unexpected {other} after term"),
        )),
    });
    parser.finish(result)
}

/// Parses a closed value or computation type; computation types come back as `U X`.
pub fn parse_type<C: CostMonoid>(source: &str) -> Result<ValType<C>, Vec<Diagnostic>> {
    let mut parser = Parser::<C>::new(source).map_err(|d| vec![d])?;
    let result = parser.any_type().and_then(|t| match parser.peek() {
        Tok::Eof => Ok(match t {
            AnyType::Val(v) => v,
            AnyType::Comp(x) => ValType::u(x),
        }),
        other => Err(Diagnostic::error(
            parser.span(),
            format!("unexpected {other} after type"),
        )),
    });
    parser.finish(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{NatAdd, NatMax};
    use crate::syntax::alpha_eq;

    type T = Term<NatAdd>;

    #[test]
    fn minimal_program() {
        let file = parse::<NatAdd>("main : F nat = ret 0").unwrap();
        assert!(file.decls.is_empty());
        assert_eq!(file.main.body, Term::ret(Term::Zero));
        assert_eq!(*file.main_type(), CompType::f(ValType::Nat));
    }

    #[test]
    fn step_with_cost() {
        let file = parse::<NatAdd>("main : F nat = step{3} ret (suc (suc 0))").unwrap();
        assert_eq!(file.main.body, Term::step(NatAdd(3), Term::ret(numeral(2))));
    }

    #[test]
    fn unbound_identifier() {
        let errs = parse::<NatAdd>("main : F nat = ret x").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].message, "unbound identifier x");
        assert_eq!(errs[0].span, 19..20);
    }

    #[test]
    fn numeric_literals_are_numerals() {
        let t: T = parse_term("7").unwrap();
        assert_eq!(t, numeral(7));
    }

    #[test]
    fn application_is_left_associative() {
        let names = vec!["f".to_owned(), "a".to_owned(), "b".to_owned()];
        let t: T = parse_term_in("f a b", &names).unwrap();
        assert_eq!(
            t,
            Term::ap(Term::ap(Term::Var(2), Term::Var(1)), Term::Var(0))
        );
    }

    #[test]
    fn lambda_body_extends_right() {
        let t: T = parse_term(r"\x. \y. ret x").unwrap();
        assert_eq!(t, Term::lam(Term::lam(Term::ret(Term::Var(1)))));
    }

    #[test]
    fn binders_and_branches() {
        let src =
            "ind 2 at n. F nat { zero => ret 0 | suc m, r => step{1} bind y <- r; ret (suc y) }";
        let t: T = parse_term(src).unwrap();
        let expected = Term::ind(
            numeral(2),
            CompType::f(ValType::Nat),
            Term::ret(Term::Zero),
            Term::step(
                NatAdd(1),
                Term::bind(Term::Var(0), Term::ret(Term::suc(Term::Var(0)))),
            ),
        );
        assert_eq!(t, expected);

        let src = "unseal seal 1 at s. F (Cl nat) { seal a => ret (seal a) | * z => ret * }";
        let t: T = parse_term(src).unwrap();
        let expected = Term::unseal(
            Term::seal(numeral(1)),
            CompType::f(ValType::cl(ValType::Nat)),
            Term::ret(Term::seal(Term::Var(0))),
            Term::ret(Term::Star),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn phase_binders_do_not_bind_term_names() {
        let errs = parse_term::<NatAdd>("plam z. z").unwrap_err();
        assert_eq!(errs[0].message, "unbound identifier z");
    }

    #[test]
    fn declarations_resolve_in_order() {
        let src = "def one : nat = 1\n def two : nat = suc one\n main : F nat = ret two";
        let file = parse::<NatAdd>(src).unwrap();
        assert_eq!(file.decls[1].body, Term::suc(Term::Var(0)));
        assert_eq!(file.main.body, Term::ret(Term::Var(0)));
        assert!(alpha_eq(&file.closed_main(), &Term::ret(numeral(2))));
    }

    #[test]
    fn forward_references_are_unbound() {
        let src = "def a : nat = b\n def b : nat = 0\n main : F nat = ret a";
        let errs = parse::<NatAdd>(src).unwrap_err();
        assert_eq!(errs[0].message, "unbound identifier b");
    }

    #[test]
    fn duplicate_declarations() {
        let src = "def a : nat = 0\n def a : nat = 1\n main : F nat = ret a";
        let errs = parse::<NatAdd>(src).unwrap_err();
        assert!(errs[0].message.contains("duplicate declaration a"));
    }

    #[test]
    fn cost_sums_and_models() {
        let t: T = parse_term("step{1 + 2} ret 0").unwrap();
        assert!(alpha_eq(&t, &Term::step(NatAdd(3), Term::ret(Term::Zero))));
        let p: Term<(NatAdd, NatMax)> = parse_term("step{(1,2)} ret 0").unwrap();
        assert_eq!(p, Term::step((NatAdd(1), NatMax(2)), Term::ret(Term::Zero)));
        let errs = parse_term::<NatAdd>("step{(1,2)} ret 0").unwrap_err();
        assert!(errs[0].message.contains("invalid nat cost literal"));
    }

    #[test]
    fn syntax_errors_have_spans() {
        let errs = parse::<NatAdd>("main : F nat = bind x <- ret 0 in x").unwrap_err();
        assert!(errs[0].message.contains("expected `;`"));
        assert_eq!(errs[0].span, 31..33);
        let errs = parse::<NatAdd>("main : nat = 0").unwrap_err();
        assert!(errs[0].message.contains("computation type"));
        let errs = parse::<NatAdd>("main : F nat = ret #").unwrap_err();
        assert!(errs[0].message.contains("unexpected character"));
    }

    #[test]
    fn span_tree_locates_subterms() {
        let src = "main : F nat = bind x <- ret 0; ret (suc x)";
        let file = parse::<NatAdd>(src).unwrap();
        let s = file.main.spans.locate(&[1, 0]);
        assert_eq!(&src[s], "suc x");
        let s = file.main.spans.locate(&[1, 0, 0, 7]);
        assert_eq!(&src[s], "x");
    }

    #[test]
    fn diagnostic_rendering() {
        let src = "main : F nat =\n  ret x";
        let errs = parse::<NatAdd>(src).unwrap_err();
        let text = errs[0].render("prog.calf", src);
        assert!(text.starts_with("prog.calf:2:7: error: unbound identifier x"));
        assert!(text.contains("      ^"));
    }

    #[test]
    fn types() {
        let ty: ValType<NatAdd> = parse_type("Pi (x : nat) F (eq (nat, x, suc 0))").unwrap();
        assert_eq!(
            ty,
            ValType::u(CompType::pi(
                ValType::Nat,
                CompType::f(ValType::eq(ValType::Nat, Term::Var(0), numeral(1)))
            ))
        );
        let ty: ValType<NatAdd> = parse_type("Sig (x : nat) Op Cl nat").unwrap();
        assert_eq!(
            ty,
            ValType::sig(ValType::Nat, ValType::op(ValType::cl(ValType::Nat)))
        );
        assert!(parse_type::<NatAdd>("U nat").is_err());
    }
}
