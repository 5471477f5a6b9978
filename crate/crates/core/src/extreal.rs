//! Exact arithmetic on the extended half-line `[0, ∞]`.
//!
//! Every distance in this crate takes values in [`ExtReal`]: a nonnegative
//! rational in lowest terms, or `∞`. There is no floating point anywhere, so
//! every comparison made by the audits is exact.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Signed exact rational used for radii and intermediate sums.
pub type Rational = num_rational::Ratio<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtRealError {
    #[error("negative value {0} is not in [0, inf]")]
    Negative(Rational),
    #[error("cannot parse {0:?} as a rational or \"inf\"")]
    Parse(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Repr {
    Finite(Rational),
    Infinity,
}

/// A value in `[0, ∞]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExtReal(Repr);

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal(Repr::Finite(Rational::new_raw(0, 1)));
    pub const ONE: ExtReal = ExtReal(Repr::Finite(Rational::new_raw(1, 1)));
    pub const INFINITY: ExtReal = ExtReal(Repr::Infinity);

    /// Wraps a nonnegative rational.
    pub fn new(value: Rational) -> Result<Self, ExtRealError> {
        if value.is_negative() {
            Err(ExtRealError::Negative(value))
        } else {
            Ok(ExtReal(Repr::Finite(value)))
        }
    }

    /// `numer / denom`; panics on a negative ratio or zero denominator.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Self::new(Rational::new(numer, denom)).expect("ExtReal::ratio called with a negative ratio")
    }

    pub fn int(n: i64) -> Self {
        Self::ratio(n, 1)
    }

    /// `max(q, 0)` for a signed rational.
    pub fn truncate(q: Rational) -> Self {
        if q.is_negative() {
            Self::ZERO
        } else {
            ExtReal(Repr::Finite(q))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self.0, Repr::Infinity)
    }

    pub fn is_finite(self) -> bool {
        !self.is_infinite()
    }

    pub fn is_zero(self) -> bool {
        matches!(self.0, Repr::Finite(q) if q.is_zero())
    }

    pub fn is_positive(self) -> bool {
        !self.is_zero()
    }

    pub fn as_finite(self) -> Option<Rational> {
        match self.0 {
            Repr::Finite(q) => Some(q),
            Repr::Infinity => None,
        }
    }

    /// Exact sum; `∞` absorbs.
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: ExtReal) -> ExtReal {
        match (self.0, other.0) {
            (Repr::Finite(a), Repr::Finite(b)) => ExtReal(Repr::Finite(a + b)),
            _ => Self::INFINITY,
        }
    }

    /// Truncated subtraction `(self - other)₊`.
    ///
    /// `∞ - finite = ∞`, `finite - ∞ = 0` and `∞ - ∞ = 0`.
    pub fn tsub(self, other: ExtReal) -> ExtReal {
        match (self.0, other.0) {
            (Repr::Finite(a), Repr::Finite(b)) => Self::truncate(a - b),
            (Repr::Infinity, Repr::Finite(_)) => Self::INFINITY,
            (_, Repr::Infinity) => Self::ZERO,
        }
    }

    /// Multiplication by `∞` with `∞·0 = 0`: the characteristic value of `self > 0`.
    pub fn scale_inf(self) -> ExtReal {
        if self.is_zero() {
            Self::ZERO
        } else {
            Self::INFINITY
        }
    }

    /// `self + q` truncated at zero, for a signed rational shift.
    pub fn shift(self, q: Rational) -> ExtReal {
        match self.0 {
            Repr::Finite(a) => Self::truncate(a + q),
            Repr::Infinity => Self::INFINITY,
        }
    }

    /// Point strictly between two values, used to probe open thresholds.
    ///
    /// For a finite lower value and `∞` above it returns `lower + 1`.
    pub fn midpoint(lower: ExtReal, upper: ExtReal) -> ExtReal {
        match (lower.0, upper.0) {
            (Repr::Finite(a), Repr::Finite(b)) => ExtReal(Repr::Finite((a + b) / Rational::from_integer(2))),
            (Repr::Finite(a), Repr::Infinity) => ExtReal(Repr::Finite(a + Rational::from_integer(1))),
            (Repr::Infinity, _) => Self::INFINITY,
        }
    }
}

impl Default for ExtReal {
    fn default() -> Self {
        Self::ZERO
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0, other.0) {
            (Repr::Finite(a), Repr::Finite(b)) => a.cmp(&b),
            (Repr::Finite(_), Repr::Infinity) => Ordering::Less,
            (Repr::Infinity, Repr::Finite(_)) => Ordering::Greater,
            (Repr::Infinity, Repr::Infinity) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<u32> for ExtReal {
    fn from(n: u32) -> Self {
        ExtReal::int(i64::from(n))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Repr::Infinity => f.write_str("inf"),
            Repr::Finite(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Repr::Finite(q) => write!(f, "{}/{}", q.numer(), q.denom()),
        }
    }
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses `"p/q"`, `"p"` or `"-p/q"` into a signed rational.
pub fn parse_rational(s: &str) -> Result<Rational, ExtRealError> {
    let err = || ExtRealError::Parse(s.to_string());
    let t = s.trim();
    let (numer, denom) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let numer: i64 = numer.parse().map_err(|_| err())?;
    let denom: i64 = denom.parse().map_err(|_| err())?;
    if denom == 0 {
        return Err(err());
    }
    Ok(Rational::new(numer, denom))
}

/// Formats a signed rational the same way [`ExtReal`] prints.
pub fn format_rational(q: Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl FromStr for ExtReal {
    type Err = ExtRealError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(Self::INFINITY);
        }
        ExtReal::new(parse_rational(t)?)
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for signed rationals written as `"p/q"` strings.
pub mod rational_string {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_rational(*q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> ExtReal {
        ExtReal::ratio(n, d)
    }

    #[test]
    fn add_examples() {
        assert_eq!(q(1, 2).add(q(1, 3)), q(5, 6));
        assert_eq!(q(1, 2).add(ExtReal::INFINITY), ExtReal::INFINITY);
        assert_eq!(ExtReal::ZERO.add(ExtReal::ZERO), ExtReal::ZERO);
    }

    #[test]
    fn tsub_examples() {
        assert_eq!(q(3, 2).tsub(q(1, 2)), ExtReal::ONE);
        assert_eq!(q(1, 2).tsub(q(3, 2)), ExtReal::ZERO);
        assert_eq!(ExtReal::INFINITY.tsub(ExtReal::INFINITY), ExtReal::ZERO);
        assert_eq!(ExtReal::INFINITY.tsub(q(7, 1)), ExtReal::INFINITY);
        assert_eq!(q(7, 1).tsub(ExtReal::INFINITY), ExtReal::ZERO);
    }

    #[test]
    fn scale_inf_examples() {
        assert_eq!(ExtReal::ZERO.scale_inf(), ExtReal::ZERO);
        assert_eq!(q(1, 7).scale_inf(), ExtReal::INFINITY);
        assert_eq!(ExtReal::INFINITY.scale_inf(), ExtReal::INFINITY);
    }

    #[test]
    fn lowest_terms_and_text() {
        assert_eq!(q(2, 4).to_string(), "1/2");
        assert_eq!(q(4, 2).to_string(), "2");
        assert_eq!(ExtReal::INFINITY.to_string(), "inf");
        assert_eq!("3/6".parse::<ExtReal>().unwrap(), q(1, 2));
        assert_eq!("inf".parse::<ExtReal>().unwrap(), ExtReal::INFINITY);
        assert!("-1/2".parse::<ExtReal>().is_err());
        assert!("1/0".parse::<ExtReal>().is_err());
        assert!("x".parse::<ExtReal>().is_err());
    }

    #[test]
    fn infinity_is_the_maximum() {
        assert!(ExtReal::INFINITY > q(1_000_000, 1));
        assert!(ExtReal::ZERO < q(1, 1_000_000));
    }

    fn ext() -> impl Strategy<Value = ExtReal> {
        prop_oneof![
            4 => (0i64..40, 1i64..12).prop_map(|(n, d)| ExtReal::ratio(n, d)),
            1 => Just(ExtReal::INFINITY),
        ]
    }

    proptest! {
        #[test]
        fn add_is_a_commutative_monoid(a in ext(), b in ext(), c in ext()) {
            prop_assert_eq!(a.add(b), b.add(a));
            prop_assert_eq!(a.add(b).add(c), a.add(b.add(c)));
            prop_assert_eq!(a.add(ExtReal::ZERO), a);
        }

        #[test]
        fn add_is_monotone(a in ext(), b in ext(), c in ext()) {
            if a <= b {
                prop_assert!(a.add(c) <= b.add(c));
            }
        }

        #[test]
        fn tsub_is_adjoint_to_add(a in ext(), b in ext(), c in ext()) {
            if b.is_finite() {
                prop_assert_eq!(a.tsub(b) <= c, a <= b.add(c));
            }
        }

        #[test]
        fn tsub_self_is_zero(a in ext()) {
            prop_assert_eq!(a.tsub(a), ExtReal::ZERO);
        }

        #[test]
        fn text_round_trips(a in ext()) {
            prop_assert_eq!(a.to_string().parse::<ExtReal>().unwrap(), a);
        }
    }
}
