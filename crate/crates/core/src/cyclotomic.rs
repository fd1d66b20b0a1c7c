//! The fields `K_m = Q_p(zeta_{p^m})` and the action of `Z_p^x` through the
//! cyclotomic character.

use std::fmt;

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::padic::{PadicElement, PadicField};
use crate::ring::RingElem;
use crate::valuation::Valuation;

/// Descriptor of the level-`m` field over the base `Q_p`.
#[derive(Clone, Debug)]
pub struct CycloField {
    base: PadicField,
    m: u32,
}

impl CycloField {
    pub fn new(base: &PadicField, m: u32) -> Result<Self> {
        if base.degree() != 1 {
            return Err(Error::InvalidInput("cyclotomic tower is built over Q_p only".into()));
        }
        let p = base.p();
        if m > 0 && p.checked_pow(m).is_none_or(|v| v > 1 << 20) {
            return Err(Error::InvalidInput(format!("level {m} is too large for p = {p}")));
        }
        Ok(CycloField { base: base.clone(), m })
    }

    pub fn base(&self) -> &PadicField {
        &self.base
    }

    pub fn level(&self) -> u32 {
        self.m
    }

    pub fn p(&self) -> u64 {
        self.base.p()
    }

    /// `p^m`.
    pub fn order(&self) -> u64 {
        self.p().pow(self.m)
    }

    /// Degree `[K_m : Q_p] = (p-1) p^(m-1)` (1 at level 0).
    pub fn degree(&self) -> usize {
        if self.m == 0 {
            1
        } else {
            ((self.p() - 1) * self.p().pow(self.m - 1)) as usize
        }
    }

    pub fn zero(&self) -> CycloElement {
        CycloElement { field: self.clone(), coeffs: vec![self.base.zero(); self.degree()] }
    }

    pub fn one(&self) -> CycloElement {
        self.scalar(&self.base.one())
    }

    pub fn scalar(&self, c: &PadicElement) -> CycloElement {
        let mut coeffs = vec![c.zero_like(); self.degree()];
        coeffs[0] = c.clone();
        CycloElement { field: self.clone(), coeffs }
    }

    pub fn from_i64(&self, n: i64) -> CycloElement {
        self.scalar(&self.base.from_i64(n))
    }

    /// The primitive root `zeta_{p^m}` (`1` at level 0).
    pub fn zeta(&self) -> CycloElement {
        self.zeta_pow(1)
    }

    /// `zeta_{p^m}^e`, reduced.
    pub fn zeta_pow(&self, e: u64) -> CycloElement {
        let mut dense = vec![self.base.zero(); self.order() as usize];
        dense[(e % self.order()) as usize] = self.base.one();
        self.reduce_dense(dense)
    }

    pub fn from_coeffs(&self, coeffs: Vec<PadicElement>) -> Result<CycloElement> {
        if coeffs.len() > self.degree() {
            return self.reduce_checked(coeffs);
        }
        let mut c = coeffs;
        while c.len() < self.degree() {
            c.push(self.base.zero());
        }
        Ok(CycloElement { field: self.clone(), coeffs: c })
    }

    fn reduce_checked(&self, coeffs: Vec<PadicElement>) -> Result<CycloElement> {
        let n = self.order() as usize;
        let mut dense = vec![self.base.zero(); n.max(coeffs.len())];
        for (i, c) in coeffs.into_iter().enumerate() {
            let idx = i % n.max(1);
            dense[idx] = dense[idx].add_ref(&c);
        }
        Ok(self.reduce_dense(dense))
    }

    /// Reduce a dense polynomial in `zeta` modulo the `p^m`-th cyclotomic polynomial
    /// `Phi(X) = sum_{j<p} X^(j p^(m-1))`.
    fn reduce_dense(&self, mut dense: Vec<PadicElement>) -> CycloElement {
        let d = self.degree();
        if self.m == 0 {
            let s = dense.iter().fold(self.base.zero(), |a, b| a.add_ref(b));
            return CycloElement { field: self.clone(), coeffs: vec![s] };
        }
        let step = self.p().pow(self.m - 1) as usize;
        let p = self.p() as usize;
        for e in (d..dense.len()).rev() {
            let c = std::mem::replace(&mut dense[e], self.base.zero());
            if c.is_zero() && c.precision() >= self.base.cap() {
                continue;
            }
            let base = e - d;
            for j in 0..p - 1 {
                let idx = base + j * step;
                dense[idx] = dense[idx].sub_ref(&c);
            }
        }
        dense.truncate(d);
        CycloElement { field: self.clone(), coeffs: dense }
    }

    fn same(&self, other: &CycloField) -> bool {
        self.m == other.m && self.base.same_field(&other.base)
    }
}

/// An element `sum_i a_i zeta^i` of `K_m`, `i < [K_m : Q_p]`.
#[derive(Clone)]
pub struct CycloElement {
    field: CycloField,
    coeffs: Vec<PadicElement>,
}

impl CycloElement {
    pub fn field(&self) -> &CycloField {
        &self.field
    }

    pub fn level(&self) -> u32 {
        self.field.m
    }

    pub fn coeffs(&self) -> &[PadicElement] {
        &self.coeffs
    }

    /// Re-express at level `m2 >= m` via `zeta_{p^m} = zeta_{p^m2}^(p^(m2-m))`.
    pub fn embed_level(&self, m2: u32) -> Result<CycloElement> {
        let m = self.level();
        if m2 < m {
            return Err(Error::InvalidInput(format!("cannot embed level {m} into level {m2}")));
        }
        if m2 == m {
            return Ok(self.clone());
        }
        let target = CycloField::new(&self.field.base, m2)?;
        let mut out = target.zero();
        if m == 0 {
            out.coeffs[0] = self.coeffs[0].clone();
            return Ok(out);
        }
        let stride = self.field.p().pow(m2 - m) as usize;
        for (i, c) in self.coeffs.iter().enumerate() {
            out.coeffs[i * stride] = c.clone();
        }
        Ok(out)
    }

    fn unify(&self, other: &CycloElement) -> (CycloElement, CycloElement) {
        assert!(self.field.base.same_field(&other.field.base), "cyclotomic operands over different base fields");
        let m = self.level().max(other.level());
        (self.embed_level(m).expect("embedding"), other.embed_level(m).expect("embedding"))
    }

    fn zip_with(&self, other: &CycloElement, f: impl Fn(&PadicElement, &PadicElement) -> PadicElement) -> CycloElement {
        if self.field.same(&other.field) {
            let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect();
            return CycloElement { field: self.field.clone(), coeffs };
        }
        let (a, b) = self.unify(other);
        a.zip_with(&b, f)
    }

    pub fn add(&self, other: &CycloElement) -> CycloElement {
        self.zip_with(other, |a, b| a.add_ref(b))
    }

    pub fn sub(&self, other: &CycloElement) -> CycloElement {
        self.zip_with(other, |a, b| a.sub_ref(b))
    }

    pub fn neg(&self) -> CycloElement {
        CycloElement { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c.neg_ref()).collect() }
    }

    pub fn mul(&self, other: &CycloElement) -> CycloElement {
        if !self.field.same(&other.field) {
            let (a, b) = self.unify(other);
            return a.mul(&b);
        }
        let d = self.coeffs.len();
        if d == 1 {
            return CycloElement { field: self.field.clone(), coeffs: vec![self.coeffs[0].mul_ref(&other.coeffs[0])] };
        }
        let mut dense: Vec<Option<PadicElement>> = vec![None; 2 * d - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                let t = a.mul_ref(b);
                dense[i + j] = Some(match dense[i + j].take() {
                    None => t,
                    Some(s) => s.add_ref(&t),
                });
            }
        }
        let zero = self.field.base.zero();
        self.field.reduce_dense(dense.into_iter().map(|c| c.unwrap_or_else(|| zero.clone())).collect())
    }

    pub fn scale(&self, c: &PadicElement) -> CycloElement {
        CycloElement { field: self.field.clone(), coeffs: self.coeffs.iter().map(|a| a.mul_ref(c)).collect() }
    }

    /// Matrix of multiplication by `self` on the basis `1, zeta, ..`.
    pub fn multiplication_matrix(&self) -> Matrix<PadicElement> {
        let d = self.coeffs.len();
        let cols: Vec<Vec<PadicElement>> = (0..d).map(|j| self.mul(&self.field.zeta_pow(j as u64)).coeffs).collect();
        Matrix::from_columns(&cols).expect("square multiplication matrix")
    }

    pub fn checked_div(&self, other: &CycloElement) -> Result<CycloElement> {
        if !self.field.same(&other.field) {
            let (a, b) = self.unify(other);
            return a.checked_div(&b);
        }
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if other.coeffs[1..].iter().all(|c| c.is_zero() && c.precision() >= other.coeffs[0].precision()) {
            let c0 = &other.coeffs[0];
            let coeffs = self.coeffs.iter().map(|a| a.checked_div(c0)).collect::<Result<Vec<_>>>()?;
            return Ok(CycloElement { field: self.field.clone(), coeffs });
        }
        let m = other.multiplication_matrix();
        let rhs = Matrix::from_columns(&[self.coeffs.clone()])?;
        let sol = m.solve(&rhs).map_err(|_| Error::DivisionByZero)?;
        Ok(CycloElement { field: self.field.clone(), coeffs: sol.column(0) })
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Coordinates `b_j` with `self = sum_j b_j (zeta - 1)^j`.
    pub fn uniformizer_coords(&self) -> Vec<PadicElement> {
        let d = self.coeffs.len();
        let mut b = vec![self.field.base.zero(); d];
        // binomial expansion of zeta^i = (1 + w)^i, i < d, needs no reduction
        for (i, a) in self.coeffs.iter().enumerate() {
            let mut binom = BigInt::from(1);
            for (j, bj) in b.iter_mut().enumerate().take(i + 1) {
                let c = self.field.base.from_bigint(&binom).lifted(a.precision() + 64);
                *bj = bj.add_ref(&a.mul_ref(&c));
                binom = binom * BigInt::from(i - j) / BigInt::from(j + 1);
            }
        }
        b
    }

    /// Valuation normalised by `v(p) = 1`, so `v(zeta_p - 1) = 1/(p-1)`.
    pub fn valuation(&self) -> Valuation {
        if self.level() == 0 {
            return self.coeffs[0].valuation();
        }
        let d = self.coeffs.len() as i64;
        self.uniformizer_coords()
            .iter()
            .enumerate()
            .filter_map(|(j, b)| b.val().map(|v| Rational64::new(v * d + j as i64, d)))
            .min()
            .map_or(Valuation::Infinite, Valuation::Finite)
    }

    pub fn precision(&self) -> i64 {
        self.coeffs.iter().map(|c| c.precision()).min().unwrap()
    }

    pub fn with_precision(&self, prec: i64) -> CycloElement {
        CycloElement { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c.with_precision(prec)).collect() }
    }

    /// Treat the stored representative as known to at least `prec` digits.
    pub fn lifted(&self, prec: i64) -> CycloElement {
        CycloElement { field: self.field.clone(), coeffs: self.coeffs.iter().map(|c| c.lifted(prec)).collect() }
    }

    /// Image under `zeta -> zeta^c` for a unit `c` of `Z_p` (only `c mod p^m` matters).
    pub fn chi_action(&self, c: &PadicElement) -> Result<CycloElement> {
        if !c.is_unit() {
            return Err(Error::Domain(format!("character value {c} is not a unit")));
        }
        let m = self.level();
        if m == 0 {
            return Ok(self.clone());
        }
        let order = self.field.order();
        let r = c.to_bigint_mod(m as i64)?.to_u64().expect("residue fits");
        let mut dense = vec![self.field.base.zero(); order as usize];
        for (i, a) in self.coeffs.iter().enumerate() {
            let e = ((i as u128 * r as u128) % order as u128) as usize;
            dense[e] = dense[e].add_ref(a);
        }
        Ok(self.field.reduce_dense(dense))
    }

    /// Smallest level `n <= m` whose field contains `self` (support on
    /// exponents divisible by `p^(m-n)`).
    pub fn min_level(&self) -> u32 {
        let m = self.level();
        let p = self.field.p() as usize;
        for n in 0..m {
            let ok = self.coeffs.iter().enumerate().all(|(i, c)| {
                if n == 0 {
                    i == 0 || c.is_zero()
                } else {
                    i % p.pow(m - n) == 0 || c.is_zero()
                }
            });
            if ok {
                return n;
            }
        }
        m
    }

    /// The same element viewed at level `n`, if it lies there.
    pub fn descend(&self, n: u32) -> Result<CycloElement> {
        if self.min_level() > n {
            return Err(Error::Precondition(format!("element does not lie in level {n}")));
        }
        let m = self.level();
        if n >= m {
            return self.embed_level(n);
        }
        let target = CycloField::new(&self.field.base, n)?;
        let mut out = target.zero();
        if n == 0 {
            out.coeffs[0] = self.coeffs[0].clone();
            return Ok(out);
        }
        let stride = self.field.p().pow(m - n) as usize;
        for (j, c) in out.coeffs.iter_mut().enumerate() {
            *c = self.coeffs[j * stride].clone();
        }
        Ok(out)
    }

    pub fn eq_at_precision(&self, other: &CycloElement) -> bool {
        self.sub(other).is_zero()
    }
}

impl RingElem for CycloElement {
    fn zero_like(&self) -> Self {
        self.field.zero()
    }
    fn one_like(&self) -> Self {
        self.field.one()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        self.field.from_i64(n)
    }
    fn from_scalar_like(&self, c: &PadicElement) -> Self {
        self.field.scalar(c)
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
        CycloElement::scale(self, c)
    }
    fn is_zero(&self) -> bool {
        CycloElement::is_zero(self)
    }
    fn try_div(&self, other: &Self) -> Result<Self> {
        self.checked_div(other)
    }
    fn div_int(&self, n: i64) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|c| c.div_i64(n)).collect::<Result<Vec<_>>>()?;
        Ok(CycloElement { field: self.field.clone(), coeffs })
    }
    fn valuation(&self) -> Valuation {
        CycloElement::valuation(self)
    }
    fn precision(&self) -> i64 {
        CycloElement::precision(self)
    }
    fn with_precision(&self, prec: i64) -> Self {
        CycloElement::with_precision(self, prec)
    }
    fn lifted(&self, prec: i64) -> Self {
        CycloElement::lifted(self, prec)
    }
    fn prime(&self) -> u64 {
        self.field.p()
    }
}

impl PartialEq for CycloElement {
    fn eq(&self, other: &Self) -> bool {
        self.eq_at_precision(other)
    }
}

impl fmt::Display for CycloElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("({c})*z"),
                _ => format!("({c})*z^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "O({}^{})", self.field.p(), self.precision())
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl fmt::Debug for CycloElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K_{}[{}]", self.level(), self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(p: u64) -> PadicField {
        PadicField::qp(p, 16).unwrap()
    }

    #[test]
    fn roots_of_unity_relations() {
        let base = k(5);
        let f = CycloField::new(&base, 1).unwrap();
        let z = f.zeta();
        assert!(z.mul(&f.zeta_pow(4)) == f.one());
        let s = (0..5).fold(f.zero(), |acc, i| acc.add(&f.zeta_pow(i)));
        assert!(s.is_zero());
        assert_eq!(z.sub(&f.one()).valuation(), Valuation::ratio(1, 4));
        let f2 = CycloField::new(&base, 2).unwrap();
        assert_eq!(f2.zeta().sub(&f2.one()).valuation(), Valuation::ratio(1, 20));
        assert_eq!(f2.from_i64(5).valuation(), Valuation::int(1));
    }

    #[test]
    fn embedding_and_action() {
        let base = k(3);
        let f1 = CycloField::new(&base, 1).unwrap();
        let f2 = CycloField::new(&base, 2).unwrap();
        let e = f1.zeta().embed_level(2).unwrap();
        assert!(e == f2.zeta_pow(3));
        assert!(f1.zeta().chi_action(&base.from_i64(2)).unwrap() == f1.zeta_pow(2));
        let a = f2.zeta().add(&f2.from_i64(4));
        assert!(a.chi_action(&base.one()).unwrap() == a);
        assert!(a.chi_action(&base.from_i64(10)).unwrap() == a);
        assert!(a.chi_action(&base.from_i64(3)).is_err());
    }

    #[test]
    fn division_and_levels() {
        let base = k(5);
        let f = CycloField::new(&base, 2).unwrap();
        let a = f.zeta().add(&f.from_i64(2));
        let b = f.zeta_pow(7).sub(&f.from_i64(3));
        let q = a.checked_div(&b).unwrap();
        assert!(q.mul(&b) == a);
        assert_eq!(f.zeta_pow(5).min_level(), 1);
        assert_eq!(f.from_i64(3).min_level(), 0);
        assert_eq!(f.zeta().min_level(), 2);
        let d = f.zeta_pow(5).descend(1).unwrap();
        assert!(d == CycloField::new(&base, 1).unwrap().zeta());
    }
}
