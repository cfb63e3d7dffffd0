//! Preordered cost monoids `(C, 0, +, <=)`.
//!
//! A monoid is represented by its element type: every `step{c}` annotation in
//! a `Term<C>` carries a `C`, and the evaluator accumulates costs with
//! [`CostMonoid::mplus`]. Commutativity is never assumed; costs are always
//! combined in program order (earlier cost on the left).

use std::fmt::{self, Debug, Display};
use std::str::FromStr;

use num_traits::{PrimInt, Unsigned};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {model} cost literal `{text}`")]
pub struct CostParseError {
    pub model: String,
    pub text: String,
}

/// A preordered monoid of abstract costs.
pub trait CostMonoid: Clone + PartialEq + Eq + Debug + Send + Sync + 'static {
    fn mzero() -> Self;

    fn mplus(&self, other: &Self) -> Self;

    /// The preorder. Exposed for tooling; nothing in the object language
    /// consumes it.
    fn mleq(&self, other: &Self) -> bool;

    fn parse_elem(text: &str) -> Result<Self, CostParseError>;

    /// Literal syntax accepted by [`CostMonoid::parse_elem`].
    fn render(&self) -> String;

    /// A small random element, used by the term generator and law tests.
    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Name as accepted by `--cost-model`.
    fn model_name() -> String;

    fn is_zero(&self) -> bool {
        *self == Self::mzero()
    }
}

/// Scalars usable as the carrier of the natural-number monoids.
pub trait NatScalar:
    PrimInt + Unsigned + FromStr + Display + Debug + Send + Sync + 'static
{
}

impl<T> NatScalar for T where
    T: PrimInt + Unsigned + FromStr + Display + Debug + Send + Sync + 'static
{
}

/// Natural numbers under saturating addition. The default cost model.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NatAdd<T = u64>(pub T);

/// Natural numbers under `max`, with identity 0. Not cancellative.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct NatMax<T = u64>(pub T);

fn parse_scalar<T: NatScalar>(model: &str, text: &str) -> Result<T, CostParseError> {
    let trimmed = text.trim();
    if trimmed.is_empty() || !trimmed.bytes().all(|b| b.is_ascii_digit()) {
        return Err(CostParseError {
            model: model.to_owned(),
            text: text.to_owned(),
        });
    }
    trimmed.parse::<T>().map_err(|_| CostParseError {
        model: model.to_owned(),
        text: text.to_owned(),
    })
}

fn sample_scalar<T: NatScalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::from(rng.gen_range(0u8..4)).unwrap_or_else(T::zero)
}

impl<T: NatScalar> CostMonoid for NatAdd<T> {
    fn mzero() -> Self {
        NatAdd(T::zero())
    }

    fn mplus(&self, other: &Self) -> Self {
        NatAdd(self.0.saturating_add(other.0))
    }

    fn mleq(&self, other: &Self) -> bool {
        self.0 <= other.0
    }

    fn parse_elem(text: &str) -> Result<Self, CostParseError> {
        parse_scalar("nat", text).map(NatAdd)
    }

    fn render(&self) -> String {
        self.0.to_string()
    }

    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        NatAdd(sample_scalar(rng))
    }

    fn model_name() -> String {
        "nat".to_owned()
    }
}

impl<T: NatScalar> CostMonoid for NatMax<T> {
    fn mzero() -> Self {
        NatMax(T::zero())
    }

    fn mplus(&self, other: &Self) -> Self {
        NatMax(self.0.max(other.0))
    }

    fn mleq(&self, other: &Self) -> bool {
        self.0 <= other.0
    }

    fn parse_elem(text: &str) -> Result<Self, CostParseError> {
        parse_scalar("nat-max", text).map(NatMax)
    }

    fn render(&self) -> String {
        self.0.to_string()
    }

    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        NatMax(sample_scalar(rng))
    }

    fn model_name() -> String {
        "nat-max".to_owned()
    }
}

/// Binary product; componentwise monoid, componentwise preorder.
impl<A: CostMonoid, B: CostMonoid> CostMonoid for (A, B) {
    fn mzero() -> Self {
        (A::mzero(), B::mzero())
    }

    fn mplus(&self, other: &Self) -> Self {
        (self.0.mplus(&other.0), self.1.mplus(&other.1))
    }

    fn mleq(&self, other: &Self) -> bool {
        self.0.mleq(&other.0) && self.1.mleq(&other.1)
    }

    fn parse_elem(text: &str) -> Result<Self, CostParseError> {
        let err = || CostParseError {
            model: Self::model_name(),
            text: text.to_owned(),
        };
        let inner = text
            .trim()
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(err)?;
        let split = top_level_comma(inner).ok_or_else(err)?;
        let a = A::parse_elem(&inner[..split]).map_err(|_| err())?;
        let b = B::parse_elem(&inner[split + 1..]).map_err(|_| err())?;
        Ok((a, b))
    }

    fn render(&self) -> String {
        format!("({},{})", self.0.render(), self.1.render())
    }

    fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        (A::sample(rng), B::sample(rng))
    }

    fn model_name() -> String {
        format!("pair:{},{}", A::model_name(), B::model_name())
    }
}

fn top_level_comma(text: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, ch) in text.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.checked_sub(1)?,
            ',' if depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

macro_rules! forward_fmt {
    ($($ty:ident),*) => {$(
        impl<T: NatScalar> Debug for $ty<T> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
        impl<T: NatScalar> Display for $ty<T> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    )*};
}

forward_fmt!(NatAdd, NatMax);

/// Cost model names accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseModel {
    Nat,
    NatMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostModel {
    Base(BaseModel),
    Pair(BaseModel, BaseModel),
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel::Base(BaseModel::Nat)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown cost model `{0}` (expected nat, nat-max or pair:M,M)")]
pub struct UnknownCostModel(pub String);

impl FromStr for BaseModel {
    type Err = UnknownCostModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "nat" => Ok(BaseModel::Nat),
            "nat-max" => Ok(BaseModel::NatMax),
            other => Err(UnknownCostModel(other.to_owned())),
        }
    }
}

impl FromStr for CostModel {
    type Err = UnknownCostModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().strip_prefix("pair:") {
            Some(rest) => {
                let (a, b) = rest
                    .split_once(',')
                    .ok_or_else(|| UnknownCostModel(s.to_owned()))?;
                let a = a.parse().map_err(|_| UnknownCostModel(s.to_owned()))?;
                let b = b.parse().map_err(|_| UnknownCostModel(s.to_owned()))?;
                Ok(CostModel::Pair(a, b))
            }
            None => s.parse().map(CostModel::Base),
        }
    }
}

impl Display for BaseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseModel::Nat => f.write_str("nat"),
            BaseModel::NatMax => f.write_str("nat-max"),
        }
    }
}

impl Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostModel::Base(b) => write!(f, "{b}"),
            CostModel::Pair(a, b) => write!(f, "pair:{a},{b}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type Pair = (NatAdd, NatAdd);

    #[test]
    fn identities() {
        assert_eq!(NatAdd::<u64>::mzero(), NatAdd(0));
        assert_eq!(NatMax::<u64>::mzero(), NatMax(0));
        assert_eq!(Pair::mzero(), (NatAdd(0), NatAdd(0)));
    }

    #[test]
    fn combine() {
        assert_eq!(NatAdd(1u64).mplus(&NatAdd(2)), NatAdd(3));
        assert_eq!(NatMax(2u64).mplus(&NatMax(5)), NatMax(5));
        assert_eq!(
            (NatAdd(1u64), NatAdd(0u64)).mplus(&(NatAdd(2), NatAdd(3))),
            (NatAdd(3), NatAdd(3))
        );
    }

    #[test]
    fn preorder() {
        assert!(NatAdd(1u64).mleq(&NatAdd(2)));
        assert!(!NatAdd(2u64).mleq(&NatAdd(1)));
        assert!(NatMax(7u64).mleq(&NatMax(7)));
    }

    #[test]
    fn saturates_instead_of_wrapping() {
        assert_eq!(NatAdd(u8::MAX).mplus(&NatAdd(3)), NatAdd(u8::MAX));
    }

    #[test]
    fn literal_syntax() {
        assert_eq!(NatAdd::<u64>::parse_elem("42"), Ok(NatAdd(42)));
        assert_eq!(Pair::parse_elem("(1, 2)"), Ok((NatAdd(1), NatAdd(2))));
        assert!(NatAdd::<u64>::parse_elem("-1").is_err());
        assert!(NatAdd::<u64>::parse_elem("").is_err());
        assert!(Pair::parse_elem("(1 2)").is_err());
        assert_eq!(Pair::mzero().render(), "(0,0)");
        type Nested = (NatAdd, (NatMax, NatAdd));
        let n = Nested::parse_elem("(1,(2,3))").unwrap();
        assert_eq!(n.render(), "(1,(2,3))");
    }

    #[test]
    fn model_names() {
        assert_eq!(
            "nat".parse::<CostModel>(),
            Ok(CostModel::Base(BaseModel::Nat))
        );
        assert_eq!(
            "pair:nat,nat-max".parse::<CostModel>(),
            Ok(CostModel::Pair(BaseModel::Nat, BaseModel::NatMax))
        );
        assert!("float".parse::<CostModel>().is_err());
        assert_eq!(<(NatAdd, NatMax)>::model_name(), "pair:nat,nat-max");
    }

    fn laws<C: CostMonoid>(a: &C, b: &C, c: &C) {
        assert_eq!(a.mplus(b).mplus(c), a.mplus(&b.mplus(c)));
        assert_eq!(C::mzero().mplus(a), *a);
        assert_eq!(a.mplus(&C::mzero()), *a);
        assert!(a.mleq(a));
        if a.mleq(b) && b.mleq(c) {
            assert!(a.mleq(c));
        }
        assert_eq!(C::parse_elem(&a.render()).as_ref(), Ok(a));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn nat_add_laws(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            laws(&NatAdd(a), &NatAdd(b), &NatAdd(c));
        }

        #[test]
        fn nat_max_laws(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
            laws(&NatMax(a), &NatMax(b), &NatMax(c));
        }

        #[test]
        fn pair_laws(a in any::<(u32, u32)>(), b in any::<(u32, u32)>(), c in any::<(u32, u32)>()) {
            let lift = |(x, y): (u32, u32)| (NatAdd(x as u64), NatMax(y as u64));
            laws(&lift(a), &lift(b), &lift(c));
        }
    }
}
