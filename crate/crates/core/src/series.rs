//! Univariate power series truncated at a fixed degree.

use std::fmt;

use crate::error::{Error, Result};
use crate::padic::PadicElement;
use crate::ring::RingElem;
use crate::valuation::Valuation;

/// `a_0 + a_1 T + .. + a_N T^N`, the image of a power series modulo `T^(N+1)`.
#[derive(Clone)]
pub struct TruncSeries<R> {
    coeffs: Vec<R>,
}

impl<R: RingElem> TruncSeries<R> {
    /// Series with the given low-order coefficients, truncated at degree `n`.
    pub fn new(mut coeffs: Vec<R>, n: usize, template: &R) -> Self {
        coeffs.truncate(n + 1);
        while coeffs.len() < n + 1 {
            coeffs.push(template.zero_like());
        }
        TruncSeries { coeffs }
    }

    pub fn zero(n: usize, template: &R) -> Self {
        Self::new(Vec::new(), n, template)
    }

    pub fn constant(c: R, n: usize) -> Self {
        let t = c.clone();
        Self::new(vec![c], n, &t)
    }

    /// `c * T^k` (zero if `k > n`).
    pub fn monomial(k: usize, c: R, n: usize) -> Self {
        let mut s = Self::zero(n, &c);
        if k <= n {
            s.coeffs[k] = c;
        }
        s
    }

    /// The variable `T`.
    pub fn var(n: usize, template: &R) -> Self {
        Self::monomial(1, template.one_like(), n)
    }

    /// Truncation degree `N`.
    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &R {
        &self.coeffs[k]
    }

    pub fn set_coeff(&mut self, k: usize, c: R) {
        self.coeffs[k] = c;
    }

    pub fn template(&self) -> &R {
        &self.coeffs[0]
    }

    /// Re-truncate (lower or pad with zeros).
    pub fn with_trunc(&self, n: usize) -> Self {
        Self::new(self.coeffs.clone(), n, self.template())
    }

    pub fn map<S: RingElem>(&self, f: impl Fn(&R) -> S) -> TruncSeries<S> {
        TruncSeries { coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn try_map<S: RingElem>(&self, f: impl Fn(&R) -> Result<S>) -> Result<TruncSeries<S>> {
        Ok(TruncSeries { coeffs: self.coeffs.iter().map(f).collect::<Result<_>>()? })
    }

    pub fn map_indexed(&self, f: impl Fn(usize, &R) -> R) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().enumerate().map(|(k, c)| f(k, c)).collect() }
    }

    fn common(&self, other: &Self) -> usize {
        self.trunc().min(other.trunc())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.common(other);
        TruncSeries { coeffs: (0..=n).map(|k| self.coeffs[k].add_ref(&other.coeffs[k])).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.common(other);
        TruncSeries { coeffs: (0..=n).map(|k| self.coeffs[k].sub_ref(&other.coeffs[k])).collect() }
    }

    pub fn neg(&self) -> Self {
        self.map(|c| c.neg_ref())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.common(other);
        let coeffs = (0..=n)
            .map(|k| {
                (0..=k).map(|i| self.coeffs[i].mul_ref(&other.coeffs[k - i])).reduce(|a, b| a.add_ref(&b)).unwrap()
            })
            .collect();
        TruncSeries { coeffs }
    }

    /// Multiply every coefficient by a ring element.
    pub fn mul_coeff(&self, c: &R) -> Self {
        self.map(|a| a.mul_ref(c))
    }

    pub fn scale(&self, c: &PadicElement) -> Self {
        self.map(|a| a.scale(c))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.template().one_like(), self.trunc());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Multiply by `T^k`, keeping the truncation degree.
    pub fn shift_up(&self, k: usize) -> Self {
        let n = self.trunc();
        let z = self.template().zero_like();
        let coeffs = (0..=n).map(|i| if i >= k { self.coeffs[i - k].clone() } else { z.clone() }).collect();
        TruncSeries { coeffs }
    }

    /// Formal derivative; the result is truncated at degree `N - 1`.
    pub fn derive(&self) -> Self {
        let n = self.trunc();
        if n == 0 {
            return Self::zero(0, self.template());
        }
        TruncSeries {
            coeffs: (1..=n).map(|k| self.coeffs[k].mul_ref(&self.template().from_i64_like(k as i64))).collect(),
        }
    }

    /// `T d/dT`, which keeps the truncation degree.
    pub fn euler(&self) -> Self {
        self.map_indexed(|k, c| c.mul_ref(&c.from_i64_like(k as i64)))
    }

    /// `f(g)` for `g` with zero constant term.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        if !g.coeffs[0].is_zero() {
            return Err(Error::Precondition("composition needs an inner series without constant term".into()));
        }
        let n = self.common(g);
        let g = g.with_trunc(n);
        let mut acc = Self::zero(n, self.template());
        for c in self.coeffs[..=n].iter().rev() {
            acc = acc.mul(&g);
            acc.coeffs[0] = acc.coeffs[0].add_ref(c);
        }
        Ok(acc)
    }

    /// Multiplicative inverse; needs an invertible constant term.
    pub fn invert(&self) -> Result<Self> {
        let a0 = &self.coeffs[0];
        if a0.is_zero() {
            return Err(Error::NotInvertible("series with vanishing constant term".into()));
        }
        let n = self.trunc();
        let mut b: Vec<R> = Vec::with_capacity(n + 1);
        b.push(a0.one_like().try_div(a0)?);
        for k in 1..=n {
            let s = (1..=k).map(|i| self.coeffs[i].mul_ref(&b[k - i])).reduce(|x, y| x.add_ref(&y)).unwrap();
            b.push(s.neg_ref().try_div(a0)?);
        }
        Ok(TruncSeries { coeffs: b })
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.invert()?))
    }

    /// Compositional inverse of `g` with `g(0) = 0` and invertible linear coefficient.
    pub fn reversion(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Precondition("reversion needs a series without constant term".into()));
        }
        let n = self.trunc();
        let t = self.template();
        if n == 0 {
            return Ok(Self::zero(0, t));
        }
        let g1 = &self.coeffs[1];
        if g1.is_zero() {
            return Err(Error::NotInvertible("reversion needs an invertible linear coefficient".into()));
        }
        let mut h = Self::monomial(1, t.one_like().try_div(g1)?, n);
        for k in 2..=n {
            let partial = self.compose(&h)?;
            let c = partial.coeffs[k].neg_ref().try_div(g1)?;
            h.coeffs[k] = c;
        }
        Ok(h)
    }

    /// Index of the first coefficient that is not zero at precision.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.order().is_none()
    }

    /// Minimum coefficient valuation (Gauss valuation).
    pub fn valuation(&self) -> Valuation {
        self.coeffs.iter().map(|c| c.valuation()).min().unwrap()
    }

    pub fn precision(&self) -> i64 {
        self.coeffs.iter().map(|c| c.precision()).min().unwrap()
    }

    pub fn eq_at_precision(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl<R: RingElem> RingElem for TruncSeries<R> {
    fn zero_like(&self) -> Self {
        Self::zero(self.trunc(), self.template())
    }
    fn one_like(&self) -> Self {
        Self::constant(self.template().one_like(), self.trunc())
    }
    fn from_i64_like(&self, n: i64) -> Self {
        Self::constant(self.template().from_i64_like(n), self.trunc())
    }
    fn from_scalar_like(&self, c: &PadicElement) -> Self {
        Self::constant(self.template().from_scalar_like(c), self.trunc())
    }
    fn add_ref(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self.sub(other)
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.mul(other)
    }
    fn neg_ref(&self) -> Self {
        self.neg()
    }
    fn scale(&self, c: &PadicElement) -> Self {
        TruncSeries::scale(self, c)
    }
    fn is_zero(&self) -> bool {
        TruncSeries::is_zero(self)
    }
    fn try_div(&self, other: &Self) -> Result<Self> {
        TruncSeries::try_div(self, other)
    }
    fn div_int(&self, n: i64) -> Result<Self> {
        self.try_map(|c| c.div_int(n))
    }
    fn valuation(&self) -> Valuation {
        TruncSeries::valuation(self)
    }
    fn precision(&self) -> i64 {
        TruncSeries::precision(self)
    }
    fn with_precision(&self, prec: i64) -> Self {
        self.map(|c| c.with_precision(prec))
    }
    fn lifted(&self, prec: i64) -> Self {
        self.map(|c| c.lifted(prec))
    }
    fn prime(&self) -> u64 {
        self.template().prime()
    }
}

impl<R: RingElem + fmt::Display> fmt::Display for TruncSeries<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})*T"),
                _ => format!("({c})*T^{k}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0 + O(T^{})", self.trunc() + 1)
        } else {
            write!(f, "{} + O(T^{})", terms.join(" + "), self.trunc() + 1)
        }
    }
}

impl<R: RingElem> fmt::Debug for TruncSeries<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicField;

    fn s(k: &PadicField, c: &[i64], n: usize) -> TruncSeries<PadicElement> {
        TruncSeries::new(c.iter().map(|&x| k.from_i64(x)).collect(), n, &k.one())
    }

    #[test]
    fn product_and_inverse() {
        let k = PadicField::qp(5, 20).unwrap();
        assert!(s(&k, &[1, 1], 6).mul(&s(&k, &[1, -1], 6)).eq_at_precision(&s(&k, &[1, 0, -1], 6)));
        let inv = s(&k, &[1, 1], 6).invert().unwrap();
        assert!(inv.eq_at_precision(&s(&k, &[1, -1, 1, -1, 1, -1, 1], 6)));
        assert!(s(&k, &[0, 1], 6).invert().is_err());
    }

    #[test]
    fn composition_and_reversion() {
        let k = PadicField::qp(3, 20).unwrap();
        let g = s(&k, &[0, 1, 2, -1], 8);
        let h = g.reversion().unwrap();
        let id = s(&k, &[0, 1], 8);
        assert!(g.compose(&h).unwrap().eq_at_precision(&id));
        assert!(h.compose(&g).unwrap().eq_at_precision(&id));
        assert!(g.compose(&s(&k, &[1, 1], 8)).is_err());
    }

    #[test]
    fn derivative_truncates() {
        let k = PadicField::qp(7, 10).unwrap();
        let f = s(&k, &[1, 2, 3, 4], 3);
        let d = f.derive();
        assert_eq!(d.trunc(), 2);
        assert!(d.eq_at_precision(&s(&k, &[2, 6, 12], 2)));
    }
}
