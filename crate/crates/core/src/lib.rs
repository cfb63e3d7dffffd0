//! A cost-aware call-by-push-value calculus.
//!
//! The crate provides the kernel syntax ([`syntax`]), a parser and printer
//! ([`parse`], [`pretty`]), a bidirectional type checker ([`check`]), an
//! equational rewriter used for definitional equality ([`rewrite`]), an
//! evaluator with a cost-erasing behavioral mode ([`eval`]) and a random
//! well-typed term generator ([`gen`]).
//!
//! Everything is generic over the cost monoid `C: CostMonoid`; the aliases
//! below fix the common choices.

pub mod check;
pub mod cost;
pub mod eval;
pub mod gen;
pub mod parse;
pub mod pretty;
pub mod rewrite;
pub mod syntax;

pub use cost::{CostModel, CostMonoid, NatAdd, NatMax};
pub use syntax::{CompType, Term, ValType};

/// The default cost model: natural numbers under addition.
pub type NatCost = NatAdd<u64>;
/// Natural numbers under `max`.
pub type MaxCost = NatMax<u64>;
/// Pairs of additive costs, e.g. time and allocations.
pub type PairCost = (NatAdd<u64>, NatAdd<u64>);

pub type NatTerm = Term<NatCost>;
pub type NatValType = ValType<NatCost>;
pub type NatCompType = CompType<NatCost>;
