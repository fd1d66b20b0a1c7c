use std::cmp::Ordering;
use std::fmt;

use num_rational::Rational64;
use num_traits::{Signed, Zero};

/// A p-adic valuation: a reduced rational or `Infinite` (the valuation of zero).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(Rational64),
    Infinite,
}

impl Valuation {
    pub fn int(n: i64) -> Self {
        Valuation::Finite(Rational64::from_integer(n))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Valuation::Finite(Rational64::new(num, den))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    pub fn finite(&self) -> Option<Rational64> {
        match self {
            Valuation::Finite(r) => Some(*r),
            Valuation::Infinite => None,
        }
    }

    pub fn numerator(&self) -> Option<i64> {
        self.finite().map(|r| *r.numer())
    }

    pub fn denominator(&self) -> Option<i64> {
        self.finite().map(|r| *r.denom())
    }

    /// Largest integer not exceeding the valuation.
    pub fn floor(&self) -> Option<i64> {
        self.finite().map(|r| r.floor().to_integer())
    }

    pub fn add(self, other: Valuation) -> Valuation {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }

    pub fn min(self, other: Valuation) -> Valuation {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, Valuation::Finite(r) if r.is_negative())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Valuation::Finite(r) if r.is_zero())
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
            (Valuation::Infinite, _) => Ordering::Greater,
            (_, Valuation::Infinite) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Infinite => write!(f, "inf"),
            Valuation::Finite(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Valuation::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_infinite_last() {
        let mut v = vec![Valuation::Infinite, Valuation::int(3), Valuation::ratio(1, 4)];
        v.sort();
        assert_eq!(v, vec![Valuation::ratio(1, 4), Valuation::int(3), Valuation::Infinite]);
    }

    #[test]
    fn fractions_are_reduced() {
        assert_eq!(Valuation::ratio(2, 8), Valuation::ratio(1, 4));
        assert_eq!(Valuation::ratio(2, 8).denominator(), Some(4));
        assert_eq!(format!("{}", Valuation::ratio(-3, 6)), "-1/2");
        assert_eq!(format!("{}", Valuation::Infinite), "inf");
    }

    #[test]
    fn addition_absorbs_infinity() {
        assert_eq!(Valuation::int(1).add(Valuation::Infinite), Valuation::Infinite);
        assert_eq!(Valuation::ratio(1, 2).add(Valuation::ratio(1, 2)), Valuation::int(1));
    }
}
