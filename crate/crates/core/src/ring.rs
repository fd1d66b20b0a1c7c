//! The arithmetic interface shared by every coefficient type in the crate.

use std::fmt::Debug;

use crate::error::Result;
use crate::padic::PadicElement;
use crate::valuation::Valuation;

/// A commutative ring element carrying p-adic precision information.
///
/// Constructors take `&self` as a template so that context (prime, level,
/// truncation) travels with the values.
pub trait RingElem: Clone + Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_i64_like(&self, n: i64) -> Self;
    /// Embed a scalar of the base p-adic field.
    fn from_scalar_like(&self, c: &PadicElement) -> Self;
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    /// Multiply by a base scalar.
    fn scale(&self, c: &PadicElement) -> Self;
    /// True when the element is indistinguishable from zero at its precision.
    fn is_zero(&self) -> bool;
    fn try_div(&self, other: &Self) -> Result<Self>;
    fn valuation(&self) -> Valuation;
    /// Absolute p-adic precision (minimum over components for composite types).
    fn precision(&self) -> i64;
    fn with_precision(&self, prec: i64) -> Self;
    /// Treat the stored representative as exact to at least `prec` digits.
    /// Only sound when the caller bounds the error propagation separately.
    fn lifted(&self, prec: i64) -> Self;
    fn prime(&self) -> u64;
    /// Division by the exact integer `n`, coefficientwise for composite types.
    fn div_int(&self, n: i64) -> Result<Self>;

    fn eq_at_precision(&self, other: &Self) -> bool {
        self.sub_ref(other).is_zero()
    }
}

impl RingElem for PadicElement {
    fn zero_like(&self) -> Self {
        self.field().zero()
    }
    fn one_like(&self) -> Self {
        self.field().one()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        self.field().from_i64(n)
    }
    fn from_scalar_like(&self, c: &PadicElement) -> Self {
        c.clone()
    }
    fn add_ref(&self, other: &Self) -> Self {
        PadicElement::add_ref(self, other)
    }
    fn sub_ref(&self, other: &Self) -> Self {
        PadicElement::sub_ref(self, other)
    }
    fn mul_ref(&self, other: &Self) -> Self {
        PadicElement::mul_ref(self, other)
    }
    fn neg_ref(&self) -> Self {
        PadicElement::neg_ref(self)
    }
    fn scale(&self, c: &PadicElement) -> Self {
        PadicElement::mul_ref(self, c)
    }
    fn is_zero(&self) -> bool {
        PadicElement::is_zero(self)
    }
    fn try_div(&self, other: &Self) -> Result<Self> {
        self.checked_div(other)
    }
    fn div_int(&self, n: i64) -> Result<Self> {
        self.div_i64(n)
    }
    fn valuation(&self) -> Valuation {
        PadicElement::valuation(self)
    }
    fn precision(&self) -> i64 {
        PadicElement::precision(self)
    }
    fn with_precision(&self, prec: i64) -> Self {
        PadicElement::with_precision(self, prec)
    }
    fn lifted(&self, prec: i64) -> Self {
        PadicElement::lifted(self, prec)
    }
    fn prime(&self) -> u64 {
        PadicElement::prime(self)
    }
}
