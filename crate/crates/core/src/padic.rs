//! Capped-precision arithmetic in Q_p and its unramified extensions.
//!
//! An element is stored as `p^val * u` where `u` is a vector of `f` integer
//! coefficients in the basis `1, b, .., b^(f-1)` (with `b` a root of the
//! chosen monic modulus), reduced modulo `p^(prec - val)`. The absolute
//! precision `prec` means the element is known modulo `p^prec`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fp_poly;
use crate::valuation::Valuation;

const POW_CACHE: usize = 512;

struct FieldInner {
    p: u64,
    f: usize,
    modulus: Vec<BigInt>,
    cap: i64,
    allow_p2: bool,
    p_big: BigInt,
    powers: Vec<BigInt>,
    frob: OnceLock<(i64, Vec<BigInt>)>,
}

/// Handle to a coefficient field `Q_p` or `Q_p[b]/(g(b))`; cheap to clone.
#[derive(Clone)]
pub struct PadicField(Arc<FieldInner>);

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl PadicField {
    /// The field `Q_p` with default precision cap `cap`.
    pub fn qp(p: u64, cap: i64) -> Result<Self> {
        Self::build(p, vec![BigInt::zero(), BigInt::one()], cap)
    }

    /// The unramified extension defined by the monic integer polynomial
    /// `modulus` (constant term first), which must be irreducible mod p.
    pub fn unramified(p: u64, modulus: &[i64], cap: i64) -> Result<Self> {
        let m: Vec<BigInt> = modulus.iter().map(|&c| BigInt::from(c)).collect();
        Self::build(p, m, cap)
    }

    fn build(p: u64, modulus: Vec<BigInt>, cap: i64) -> Result<Self> {
        if !is_prime(p) || p > u32::MAX as u64 {
            return Err(Error::InvalidInput(format!("{p} is not a supported prime")));
        }
        if cap < 1 {
            return Err(Error::InvalidInput("precision cap must be at least 1".into()));
        }
        if modulus.len() < 2 || !modulus.last().unwrap().is_one() {
            return Err(Error::InvalidInput("modulus must be monic of degree at least 1".into()));
        }
        let f = modulus.len() - 1;
        let p_big = BigInt::from(p);
        if f > 1 {
            let red: Vec<u64> = modulus.iter().map(|c| c.mod_floor(&p_big).to_u64().unwrap()).collect();
            if !fp_poly::is_irreducible(&red, p) {
                return Err(Error::InvalidInput("modulus is not irreducible modulo p".into()));
            }
        }
        let mut powers = Vec::with_capacity(POW_CACHE);
        let mut acc = BigInt::one();
        for _ in 0..POW_CACHE {
            powers.push(acc.clone());
            acc *= &p_big;
        }
        Ok(PadicField(Arc::new(FieldInner {
            p,
            f,
            modulus,
            cap,
            allow_p2: false,
            p_big,
            powers,
            frob: OnceLock::new(),
        })))
    }

    /// Enables `p = 2` for log/exp with the tightened domains `v(a-1) >= 2`, `v(a) >= 2`.
    pub fn allowing_p2(self) -> Self {
        let inner = &self.0;
        PadicField(Arc::new(FieldInner {
            p: inner.p,
            f: inner.f,
            modulus: inner.modulus.clone(),
            cap: inner.cap,
            allow_p2: true,
            p_big: inner.p_big.clone(),
            powers: inner.powers.clone(),
            frob: OnceLock::new(),
        }))
    }

    /// Same field with a different default precision cap.
    pub fn with_cap(&self, cap: i64) -> Result<Self> {
        let f = Self::build(self.p(), self.0.modulus.clone(), cap)?;
        Ok(if self.0.allow_p2 { f.allowing_p2() } else { f })
    }

    pub fn p(&self) -> u64 {
        self.0.p
    }

    pub fn degree(&self) -> usize {
        self.0.f
    }

    /// Cardinality `q = p^f` of the residue field.
    pub fn residue_size(&self) -> u64 {
        self.0.p.pow(self.0.f as u32)
    }

    pub fn cap(&self) -> i64 {
        self.0.cap
    }

    pub fn allows_p2(&self) -> bool {
        self.0.allow_p2
    }

    pub fn modulus(&self) -> &[BigInt] {
        &self.0.modulus
    }

    pub fn same_field(&self, other: &PadicField) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.p == other.0.p && self.0.modulus == other.0.modulus)
    }

    pub(crate) fn p_pow(&self, k: i64) -> BigInt {
        assert!(k >= 0, "negative power of p requested");
        let k = k as usize;
        if k < POW_CACHE {
            self.0.powers[k].clone()
        } else {
            num_traits::pow(self.0.p_big.clone(), k)
        }
    }

    pub(crate) fn vp_int(&self, n: &BigInt) -> i64 {
        if n.is_zero() {
            return i64::MAX;
        }
        let mut n = n.clone();
        let mut v = 0;
        loop {
            let (q, r) = n.div_rem(&self.0.p_big);
            if !r.is_zero() {
                return v;
            }
            n = q;
            v += 1;
        }
    }

    /// `v_p(n)` for a nonzero machine integer.
    pub fn vp_i64(&self, n: i64) -> i64 {
        self.vp_int(&BigInt::from(n))
    }

    fn reduce(&self, v: &mut [BigInt], m: &BigInt) {
        for c in v.iter_mut() {
            *c = c.mod_floor(m);
        }
    }

    fn mulmod(&self, a: &[BigInt], b: &[BigInt], m: &BigInt) -> Vec<BigInt> {
        let f = self.0.f;
        if f == 1 {
            return vec![(&a[0] * &b[0]).mod_floor(m)];
        }
        let mut r = vec![BigInt::zero(); 2 * f - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                r[i + j] += x * y;
            }
        }
        let g = &self.0.modulus;
        for deg in (f..2 * f - 1).rev() {
            let c = std::mem::take(&mut r[deg]);
            if c.is_zero() {
                continue;
            }
            for i in 0..f {
                r[deg - f + i] -= &c * &g[i];
            }
        }
        r.truncate(f);
        self.reduce(&mut r, m);
        r
    }

    fn powmod(&self, a: &[BigInt], mut e: BigInt, m: &BigInt) -> Vec<BigInt> {
        let mut acc = self.unit_vec(BigInt::one());
        let mut base = a.to_vec();
        let two = BigInt::from(2u8);
        while !e.is_zero() {
            if e.is_odd() {
                acc = self.mulmod(&acc, &base, m);
            }
            e /= &two;
            if !e.is_zero() {
                base = self.mulmod(&base, &base, m);
            }
        }
        self.reduce(&mut acc, m);
        acc
    }

    fn unit_vec(&self, c: BigInt) -> Vec<BigInt> {
        let mut v = vec![BigInt::zero(); self.0.f];
        v[0] = c;
        v
    }

    /// Inverse of a unit vector modulo `p^r` (r >= 1).
    fn unit_inverse(&self, u: &[BigInt], r: i64) -> Vec<BigInt> {
        let m = self.p_pow(r);
        if self.0.f == 1 {
            let g = u[0].extended_gcd(&m);
            return vec![g.x.mod_floor(&m)];
        }
        let q = BigInt::from(self.residue_size());
        let pm = self.0.p_big.clone();
        let mut y = self.powmod(u, q - 2u8, &pm);
        let mut k = 1;
        let two = self.unit_vec(BigInt::from(2u8));
        while k < r {
            k = (2 * k).min(r);
            let mk = self.p_pow(k);
            let uy = self.mulmod(u, &y, &mk);
            let corr: Vec<BigInt> = two.iter().zip(uy.iter()).map(|(a, b)| a - b).collect();
            y = self.mulmod(&y, &corr, &mk);
        }
        self.reduce(&mut y, &m);
        y
    }

    fn normalize(&self, val: i64, mut raw: Vec<BigInt>, prec: i64) -> PadicElement {
        if prec - val <= 0 {
            return self.zero_with_prec(prec);
        }
        let m = self.p_pow(prec - val);
        self.reduce(&mut raw, &m);
        let v = raw.iter().map(|c| self.vp_int(c)).min().unwrap_or(i64::MAX);
        if v == i64::MAX {
            return self.zero_with_prec(prec);
        }
        let mut val = val;
        if v > 0 {
            let d = self.p_pow(v);
            for c in raw.iter_mut() {
                *c = &*c / &d;
            }
            val += v;
            if prec - val <= 0 {
                return self.zero_with_prec(prec);
            }
        }
        PadicElement { field: self.clone(), val, unit: raw, prec }
    }

    /// Zero known modulo `p^prec`.
    pub fn zero_with_prec(&self, prec: i64) -> PadicElement {
        PadicElement { field: self.clone(), val: prec, unit: vec![BigInt::zero(); self.0.f], prec }
    }

    pub fn zero(&self) -> PadicElement {
        self.zero_with_prec(self.0.cap)
    }

    pub fn one(&self) -> PadicElement {
        self.from_i64(1)
    }

    /// An integer, known to relative precision `cap`.
    pub fn from_bigint(&self, n: &BigInt) -> PadicElement {
        if n.is_zero() {
            return self.zero();
        }
        let v = self.vp_int(n);
        self.normalize(0, self.unit_vec(n.clone()), self.0.cap + v)
    }

    pub fn from_i64(&self, n: i64) -> PadicElement {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_rational(&self, r: &Rational64) -> Result<PadicElement> {
        self.from_i64(*r.numer()).checked_div(&self.from_i64(*r.denom()))
    }

    /// `p^k` exactly, known to relative precision `cap`.
    pub fn p_power(&self, k: i64) -> PadicElement {
        PadicElement { field: self.clone(), val: k, unit: self.unit_vec(BigInt::one()), prec: k + self.0.cap }
    }

    /// Element with integer coefficients `c_0 + c_1 b + ..` (absolute precision `prec`).
    pub fn from_coeffs(&self, coeffs: &[BigInt], prec: i64) -> Result<PadicElement> {
        if coeffs.len() > self.0.f {
            return Err(Error::InvalidInput(format!(
                "expected at most {} coefficients, got {}",
                self.0.f,
                coeffs.len()
            )));
        }
        let mut raw = vec![BigInt::zero(); self.0.f];
        for (r, c) in raw.iter_mut().zip(coeffs) {
            *r = c.clone();
        }
        Ok(self.normalize(0, raw, prec))
    }

    /// Element `p^val * sum_i digits_i p^i` in Q_p known modulo `p^prec`.
    pub fn from_digits(&self, digits: &[u64], val: i64, prec: i64) -> Result<PadicElement> {
        if let Some(d) = digits.iter().find(|&&d| d >= self.0.p) {
            return Err(Error::InvalidInput(format!("digit {d} out of range for p = {}", self.0.p)));
        }
        let mut n = BigInt::zero();
        for &d in digits.iter().rev() {
            n = n * &self.0.p_big + BigInt::from(d);
        }
        let mut raw = self.unit_vec(n);
        if val < 0 {
            return Ok(self.normalize(val, std::mem::take(&mut raw), prec));
        }
        raw[0] *= self.p_pow(val);
        Ok(self.normalize(0, raw, prec))
    }

    /// Teichmüller lift of the residue with coordinates `r` (length `f`).
    pub fn teichmuller(&self, r: &[u64]) -> Result<PadicElement> {
        if r.len() != self.0.f {
            return Err(Error::InvalidInput(format!("residue needs {} coordinates", self.0.f)));
        }
        if let Some(d) = r.iter().find(|&&d| d >= self.0.p) {
            return Err(Error::InvalidInput(format!("residue coordinate {d} out of range")));
        }
        let raw: Vec<BigInt> = r.iter().map(|&d| BigInt::from(d)).collect();
        if raw.iter().all(|c| c.is_zero()) {
            return Ok(self.zero());
        }
        let cap = self.0.cap;
        let m = self.p_pow(cap);
        let q = BigInt::from(self.residue_size());
        let mut x = raw;
        for _ in 0..=cap + 1 {
            let next = self.powmod(&x, q.clone(), &m);
            if next == x {
                break;
            }
            x = next;
        }
        Ok(self.normalize(0, x, cap))
    }

    /// All elements of the residue field, as coordinate vectors in lexicographic order.
    pub fn residues(&self) -> Vec<Vec<u64>> {
        let p = self.0.p;
        let f = self.0.f;
        let mut out = vec![vec![0u64; f]];
        for i in 0..f {
            let mut next = Vec::with_capacity(out.len() * p as usize);
            for base in &out {
                for d in 0..p {
                    let mut v = base.clone();
                    v[i] = d;
                    next.push(v);
                }
            }
            out = next;
        }
        out
    }

    /// Lift of a residue vector to an element with small integer coefficients.
    pub fn residue_lift(&self, r: &[u64]) -> PadicElement {
        let raw: Vec<BigInt> = r.iter().map(|&d| BigInt::from(d)).collect();
        self.normalize(0, raw, self.0.cap)
    }

    fn frobenius_root(&self, prec: i64) -> Vec<BigInt> {
        let default = 4 * self.0.cap + 8;
        if prec <= default {
            let (_, v) = self.0.frob.get_or_init(|| (default, self.compute_frobenius_root(default)));
            let m = self.p_pow(prec);
            let mut v = v.clone();
            self.reduce(&mut v, &m);
            return v;
        }
        self.compute_frobenius_root(prec)
    }

    fn compute_frobenius_root(&self, prec: i64) -> Vec<BigInt> {
        let f = self.0.f;
        let mut beta = vec![BigInt::zero(); f];
        beta[1] = BigInt::one();
        let m = self.p_pow(prec);
        let mut y = self.powmod(&beta, BigInt::from(self.0.p), &m);
        let g = &self.0.modulus;
        let dg: Vec<BigInt> = (1..g.len()).map(|i| &g[i] * BigInt::from(i)).collect();
        let eval = |coeffs: &[BigInt], x: &[BigInt]| -> Vec<BigInt> {
            let mut acc = vec![BigInt::zero(); f];
            for c in coeffs.iter().rev() {
                acc = self.mulmod(&acc, x, &m);
                acc[0] += c;
            }
            self.reduce(&mut acc, &m);
            acc
        };
        let mut steps = 0;
        loop {
            let gy = eval(g, &y);
            if gy.iter().all(|c| c.is_zero()) || steps > 2 * (64 - (prec as u64).leading_zeros()) + 4 {
                break;
            }
            let dgy = eval(&dg, &y);
            let inv = self.unit_inverse(&dgy, prec);
            let corr = self.mulmod(&gy, &inv, &m);
            for (a, b) in y.iter_mut().zip(corr) {
                *a = (&*a - b).mod_floor(&m);
            }
            steps += 1;
        }
        y
    }
}

impl fmt::Debug for PadicField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PadicField(p={}, f={}, cap={})", self.0.p, self.0.f, self.0.cap)
    }
}

/// An element of a [`PadicField`] with its own absolute precision.
#[derive(Clone)]
pub struct PadicElement {
    field: PadicField,
    val: i64,
    unit: Vec<BigInt>,
    prec: i64,
}

impl PadicElement {
    pub fn field(&self) -> &PadicField {
        &self.field
    }

    pub fn prime(&self) -> u64 {
        self.field.p()
    }

    pub fn is_zero(&self) -> bool {
        self.unit.iter().all(|c| c.is_zero())
    }

    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.val == 0
    }

    pub fn valuation(&self) -> Valuation {
        if self.is_zero() {
            Valuation::Infinite
        } else {
            Valuation::int(self.val)
        }
    }

    /// Integer valuation, `None` for zero.
    pub fn val(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.val)
        }
    }

    /// Valuation with zero reported as its precision (a lower bound for the true value).
    pub fn val_or_prec(&self) -> i64 {
        if self.is_zero() {
            self.prec
        } else {
            self.val
        }
    }

    pub fn precision(&self) -> i64 {
        self.prec
    }

    pub fn relative_precision(&self) -> i64 {
        self.prec - self.val_or_prec()
    }

    /// Unit part coefficients (reduced modulo `p^(prec - val)`).
    pub fn unit_coeffs(&self) -> &[BigInt] {
        &self.unit
    }

    /// Forget digits beyond `p^prec` (never raises precision).
    pub fn with_precision(&self, prec: i64) -> PadicElement {
        if prec >= self.prec {
            return self.clone();
        }
        if self.is_zero() {
            return self.field.zero_with_prec(prec);
        }
        self.field.normalize(self.val, self.unit.clone(), prec)
    }

    /// Treat the stored representative as known modulo `p^prec`.
    pub fn lifted(&self, prec: i64) -> PadicElement {
        if self.is_zero() {
            return self.field.zero_with_prec(prec);
        }
        self.field.normalize(self.val, self.unit.clone(), prec.max(self.prec))
    }

    fn check(&self, other: &PadicElement) {
        assert!(
            self.field.same_field(&other.field),
            "p-adic operands live in different fields: {:?} vs {:?}",
            self.field,
            other.field
        );
    }

    fn scaled_raw(&self, target_val: i64) -> Vec<BigInt> {
        let s = self.field.p_pow(self.val - target_val);
        self.unit.iter().map(|c| c * &s).collect()
    }

    pub fn add_ref(&self, other: &PadicElement) -> PadicElement {
        self.check(other);
        let prec = self.prec.min(other.prec);
        let (sz, oz) = (self.is_zero(), other.is_zero());
        if sz && oz {
            return self.field.zero_with_prec(prec);
        }
        if sz {
            return other.with_precision(prec);
        }
        if oz {
            return self.with_precision(prec);
        }
        let e = self.val.min(other.val);
        if e >= prec {
            return self.field.zero_with_prec(prec);
        }
        let a = self.scaled_raw(e);
        let b = other.scaled_raw(e);
        let raw = a.into_iter().zip(b).map(|(x, y)| x + y).collect();
        self.field.normalize(e, raw, prec)
    }

    pub fn neg_ref(&self) -> PadicElement {
        if self.is_zero() {
            return self.clone();
        }
        let raw = self.unit.iter().map(|c| -c).collect();
        self.field.normalize(self.val, raw, self.prec)
    }

    pub fn sub_ref(&self, other: &PadicElement) -> PadicElement {
        self.add_ref(&other.neg_ref())
    }

    pub fn mul_ref(&self, other: &PadicElement) -> PadicElement {
        self.check(other);
        let va = self.val_or_prec();
        let vb = other.val_or_prec();
        let prec = (self.prec + vb).min(other.prec + va).min(self.prec).min(other.prec);
        if self.is_zero() || other.is_zero() {
            return self.field.zero_with_prec(prec);
        }
        let val = va + vb;
        if val >= prec {
            return self.field.zero_with_prec(prec);
        }
        let m = self.field.p_pow(prec - val);
        let raw = self.field.mulmod(&self.unit, &other.unit, &m);
        self.field.normalize(val, raw, prec)
    }

    pub fn checked_div(&self, other: &PadicElement) -> Result<PadicElement> {
        self.check(other);
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let va = self.val_or_prec();
        let vb = other.val;
        let prec = (self.prec - vb).min(other.prec + va - 2 * vb).min(self.prec).min(other.prec);
        if self.is_zero() {
            return Ok(self.field.zero_with_prec(prec));
        }
        let val = va - vb;
        let rel = prec - val;
        if rel <= 0 {
            return Ok(self.field.zero_with_prec(prec));
        }
        let inv = self.field.unit_inverse(&other.unit, rel);
        let m = self.field.p_pow(rel);
        let raw = self.field.mulmod(&self.unit, &inv, &m);
        Ok(self.field.normalize(val, raw, prec))
    }

    pub fn inverse(&self) -> Result<PadicElement> {
        self.field.one().checked_div(self)
    }

    pub fn pow(&self, mut e: u64) -> PadicElement {
        let mut acc = self.field.one();
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        acc
    }

    pub fn pow_i64(&self, e: i64) -> Result<PadicElement> {
        if e >= 0 {
            Ok(self.pow(e as u64))
        } else {
            self.pow(e.unsigned_abs()).inverse()
        }
    }

    /// Multiply by `p^k` exactly (no precision loss).
    pub fn shift(&self, k: i64) -> PadicElement {
        if self.is_zero() {
            return self.field.zero_with_prec(self.prec + k);
        }
        PadicElement { field: self.field.clone(), val: self.val + k, unit: self.unit.clone(), prec: self.prec + k }
    }

    pub fn mul_i64(&self, n: i64) -> PadicElement {
        self.mul_ref(&self.field.from_i64(n))
    }

    /// Division by the exact integer `n`.
    pub fn div_i64(&self, n: i64) -> Result<PadicElement> {
        let exact = self.prec.saturating_add(64).max(self.field.cap());
        self.checked_div(&self.field.from_i64(n).lifted(exact))
    }

    /// Equality at the smaller of the two precisions.
    pub fn eq_at_precision(&self, other: &PadicElement) -> bool {
        self.field.same_field(&other.field) && self.sub_ref(other).is_zero()
    }

    /// Reduction to the residue field; requires a nonnegative valuation.
    pub fn residue(&self) -> Result<Vec<u64>> {
        if self.prec < 1 {
            return Err(Error::PrecisionExhausted("residue of an element known modulo 1".into()));
        }
        if self.is_zero() || self.val > 0 {
            return Ok(vec![0; self.field.degree()]);
        }
        if self.val < 0 {
            return Err(Error::Domain("residue of a non-integral element".into()));
        }
        let p = &self.field.0.p_big;
        Ok(self.unit.iter().map(|c| c.mod_floor(p).to_u64().unwrap()).collect())
    }

    /// Representative in `[0, p^k)` of an element of `Z_p` (f = 1) modulo `p^k`.
    pub fn to_bigint_mod(&self, k: i64) -> Result<BigInt> {
        if self.field.degree() != 1 {
            return Err(Error::Domain("integer representative requested in an extension".into()));
        }
        if self.prec < k {
            return Err(Error::PrecisionExhausted(format!(
                "element known modulo p^{} but p^{} requested",
                self.prec, k
            )));
        }
        if self.is_zero() {
            return Ok(BigInt::zero());
        }
        if self.val < 0 {
            return Err(Error::Domain("integer representative of a non-integral element".into()));
        }
        let n = &self.unit[0] * self.field.p_pow(self.val);
        Ok(n.mod_floor(&self.field.p_pow(k)))
    }

    /// Symmetric integer representative when `f = 1` and the element is integral.
    pub fn to_signed_bigint(&self) -> Option<BigInt> {
        if self.field.degree() != 1 || (self.val < 0 && !self.is_zero()) {
            return None;
        }
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        let m = self.field.p_pow(self.prec - self.val);
        let mut u = self.unit[0].clone();
        if &u * 2 > m {
            u -= &m;
        }
        Some(u * self.field.p_pow(self.val))
    }

    /// Canonical sort key: valuation first, then the reduced representative.
    pub fn sort_key(&self) -> (Valuation, Vec<BigInt>) {
        (self.valuation(), self.unit.clone())
    }

    /// Absolute Frobenius, the lift of `y -> y^p` on the residue field.
    pub fn frobenius(&self) -> PadicElement {
        if self.field.degree() == 1 || self.is_zero() {
            return self.clone();
        }
        let rel = self.prec - self.val;
        let y = self.field.frobenius_root(rel);
        let m = self.field.p_pow(rel);
        let mut acc = vec![BigInt::zero(); self.field.degree()];
        for c in self.unit.iter().rev() {
            acc = self.field.mulmod(&acc, &y, &m);
            acc[0] += c;
        }
        self.field.normalize(self.val, acc, self.prec)
    }

    /// Characteristic exponent used by both domains: `v > 1/(p-1)` resp. `v(a-1) >= 1`.
    fn series_domain_min(&self) -> Result<i64> {
        let p = self.prime();
        if p == 2 {
            if !self.field.allows_p2() {
                return Err(Error::Domain("p = 2 requires an explicitly enabled field".into()));
            }
            Ok(2)
        } else {
            Ok(1)
        }
    }

    /// p-adic logarithm on `1 + p O` (on `1 + 4 O` for an enabled p = 2).
    ///
    /// The series is summed on a lifted representative at a working precision
    /// that absorbs the `/k` losses, so the result is known to the absolute
    /// precision of the argument.
    pub fn log(&self) -> Result<PadicElement> {
        let need = self.series_domain_min()?;
        let one = self.field.one();
        let z = self.sub_ref(&one);
        let target = self.prec;
        if z.is_zero() {
            if target < need {
                return Err(Error::PrecisionExhausted("log argument known to too few digits".into()));
            }
            return Ok(self.field.zero_with_prec(target));
        }
        let vz = z.val;
        if vz < need {
            return Err(Error::Domain(format!("log needs v(a - 1) >= {need}, got {vz}")));
        }
        let p = self.prime() as i64;
        let flog = |k: i64| -> i64 {
            let mut e = 0;
            let mut x = k;
            while x >= p {
                x /= p;
                e += 1;
            }
            e
        };
        let mut kmax = 1;
        while (kmax + 1) * vz - flog(kmax + 1) < target {
            kmax += 1;
        }
        let work = target + flog(kmax) + 2;
        let zl = z.lifted(work);
        let mut power = zl.clone();
        let mut sum = self.field.zero_with_prec(work);
        for k in 1..=kmax {
            let term = power.checked_div(&self.field.from_i64(k).lifted(work + 64))?;
            sum = if k % 2 == 1 { sum.add_ref(&term) } else { sum.sub_ref(&term) };
            power = power.mul_ref(&zl);
        }
        Ok(sum.with_precision(target))
    }

    /// p-adic exponential on `v(a) > 1/(p-1)`.
    pub fn exp(&self) -> Result<PadicElement> {
        let need = self.series_domain_min()?;
        let target = self.prec;
        if self.is_zero() {
            if target < need {
                return Err(Error::PrecisionExhausted("exp argument known to too few digits".into()));
            }
            return Ok(self.field.one().with_precision(target));
        }
        if self.val < need {
            return Err(Error::Domain(format!("exp needs v(a) >= {need}, got {}", self.val)));
        }
        let p = self.prime() as i64;
        let va = self.val;
        // v(a^k/k!) >= k*va - (k-1)/(p-1)
        let bound = |k: i64| -> i64 { (k * va * (p - 1) - (k - 1)).div_euclid(p - 1) };
        let mut kmax = 0;
        while bound(kmax + 1) < target {
            kmax += 1;
        }
        let mut vfact = 0;
        for k in 1..=kmax {
            vfact += self.field.vp_i64(k);
        }
        let work = target + vfact + 2;
        let al = self.lifted(work);
        let mut term = self.field.one().lifted(work);
        let mut sum = term.clone();
        for k in 1..=kmax {
            term = term.mul_ref(&al).checked_div(&self.field.from_i64(k).lifted(work + 64))?;
            sum = sum.add_ref(&term);
        }
        Ok(sum.with_precision(target))
    }
}

impl PartialEq for PadicElement {
    /// Equality at the smaller precision of the two operands.
    fn eq(&self, other: &Self) -> bool {
        self.eq_at_precision(other)
    }
}

impl fmt::Display for PadicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.prime();
        if self.is_zero() {
            return write!(f, "O({}^{})", p, self.prec);
        }
        let m = self.field.p_pow(self.prec - self.val);
        let sym = |c: &BigInt| -> BigInt {
            if c * 2 > m {
                c - &m
            } else {
                c.clone()
            }
        };
        let body = if self.field.degree() == 1 {
            let u = sym(&self.unit[0]);
            if self.val >= 0 {
                format!("{}", u * self.field.p_pow(self.val))
            } else {
                format!("{}/{}^{}", u, p, -self.val)
            }
        } else {
            let terms: Vec<String> = self
                .unit
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| match i {
                    0 => format!("{}", sym(c)),
                    1 => format!("{}*b", sym(c)),
                    _ => format!("{}*b^{}", sym(c), i),
                })
                .collect();
            let inner = format!("({})", terms.join(" + "));
            if self.val == 0 {
                inner
            } else {
                format!("{}*{}^{}", inner, p, self.val)
            }
        };
        write!(f, "{} + O({}^{})", body, p, self.prec)
    }
}

impl fmt::Debug for PadicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $imp:ident) => {
        impl $tr<&PadicElement> for &PadicElement {
            type Output = PadicElement;
            fn $m(self, rhs: &PadicElement) -> PadicElement {
                self.$imp(rhs)
            }
        }
        impl $tr<PadicElement> for PadicElement {
            type Output = PadicElement;
            fn $m(self, rhs: PadicElement) -> PadicElement {
                self.$imp(&rhs)
            }
        }
        impl $tr<&PadicElement> for PadicElement {
            type Output = PadicElement;
            fn $m(self, rhs: &PadicElement) -> PadicElement {
                self.$imp(rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);

impl Div<&PadicElement> for &PadicElement {
    type Output = PadicElement;
    /// Panics on division by zero; use [`PadicElement::checked_div`] otherwise.
    fn div(self, rhs: &PadicElement) -> PadicElement {
        self.checked_div(rhs).expect("p-adic division by zero")
    }
}

impl Neg for &PadicElement {
    type Output = PadicElement;
    fn neg(self) -> PadicElement {
        self.neg_ref()
    }
}

impl Neg for PadicElement {
    type Output = PadicElement;
    fn neg(self) -> PadicElement {
        self.neg_ref()
    }
}

/// `v_p(n!)` by Legendre's formula.
pub fn vp_factorial(p: u64, n: u64) -> i64 {
    let mut s = 0;
    let mut q = n;
    while q > 0 {
        q /= p;
        s += q as i64;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q5() -> PadicField {
        PadicField::qp(5, 20).unwrap()
    }

    #[test]
    fn small_integer_product() {
        let k = q5();
        let r = k.from_i64(2) * k.from_i64(3);
        assert_eq!(r, k.from_i64(6));
        assert_eq!(r.precision(), 20);
        assert_eq!(format!("{r}"), "6 + O(5^20)");
    }

    #[test]
    fn unit_divided_by_itself() {
        let k = q5();
        let a = k.from_i64(7) + k.from_i64(3).shift(4);
        assert_eq!(&a / &a, k.one());
    }

    #[test]
    fn inverse_of_one_plus_p_by_geometric_series() {
        let k = q5();
        let one_p = k.from_i64(6);
        let mut geo = k.zero();
        let mut term = k.one();
        for _ in 0..25 {
            geo = geo + term.clone();
            term = term * k.from_i64(-5);
        }
        assert_eq!(one_p.inverse().unwrap(), geo);
        assert_eq!(one_p * geo, k.one());
    }

    #[test]
    fn division_by_p_power_loses_digits() {
        let k = q5();
        let r = k.one().checked_div(&k.p_power(3)).unwrap();
        assert_eq!(r.precision(), 17);
        assert_eq!(r.valuation(), Valuation::int(-3));
        assert!(k.one().checked_div(&k.zero()).is_err());
    }

    #[test]
    fn valuations() {
        let k = q5();
        assert_eq!(k.p_power(3).valuation(), Valuation::int(3));
        assert_eq!(k.from_i64(7).valuation(), Valuation::int(0));
        let u = k.from_i64(3);
        assert_eq!((k.p_power(1) * u + k.p_power(4)).valuation(), Valuation::int(1));
        assert_eq!(k.zero().valuation(), Valuation::Infinite);
    }

    #[test]
    fn log_examples() {
        let k = q5();
        assert!(k.one().log().unwrap().is_zero());
        let a = k.from_i64(6);
        let la = a.log().unwrap();
        assert_eq!((&a * &a).log().unwrap(), la.mul_i64(2));
        // direct partial sums of p - p^2/2 + p^3/3 - ...
        let mut s = k.zero();
        for j in 1..=30i64 {
            let t = k.p_power(j).div_i64(j).unwrap();
            s = if j % 2 == 1 { s + t } else { s - t };
        }
        assert_eq!(la, s);
        assert!(k.from_i64(2).log().is_err());
    }

    #[test]
    fn exp_examples() {
        let k = q5();
        assert_eq!(k.zero().exp().unwrap(), k.one());
        let p = k.p_power(1);
        assert_eq!(p.exp().unwrap() * p.exp().unwrap(), p.mul_i64(2).exp().unwrap());
        let u = k.from_i64(26);
        assert_eq!(u.log().unwrap().exp().unwrap(), u);
        assert!(k.one().exp().is_err());
    }

    #[test]
    fn teichmuller_examples() {
        let k = q5();
        assert!(k.teichmuller(&[0]).unwrap().is_zero());
        assert_eq!(k.teichmuller(&[1]).unwrap(), k.one());
        let w = k.teichmuller(&[2]).unwrap();
        assert_eq!(w.pow(4), k.one());
        assert_eq!(w.residue().unwrap(), vec![2]);
        assert_eq!(w.pow(2), k.from_i64(-1));
    }

    #[test]
    fn unramified_quadratic() {
        let e = PadicField::unramified(3, &[1, 0, 1], 12).unwrap();
        let b = e.from_coeffs(&[BigInt::zero(), BigInt::one()], 12).unwrap();
        assert_eq!(&b * &b, e.from_i64(-1));
        let a = e.from_coeffs(&[BigInt::from(2), BigInt::from(1)], 12).unwrap();
        assert_eq!(&a * &a.inverse().unwrap(), e.one());
        let t = e.teichmuller(&[1, 2]).unwrap();
        assert_eq!(t.pow(9), t);
        assert_eq!(t.frobenius(), t.pow(3));
        assert_eq!(a.frobenius().frobenius(), a);
        assert!(PadicField::unramified(5, &[1, 0, 1], 10).is_err());
    }

    #[test]
    fn p_two_is_gated() {
        let k = PadicField::qp(2, 16).unwrap();
        assert!(k.from_i64(5).log().is_err());
        let k2 = k.allowing_p2();
        let l = k2.from_i64(5).log().unwrap();
        assert_eq!(l.exp().unwrap(), k2.from_i64(5));
        assert!(k2.from_i64(3).log().is_err());
    }

    #[test]
    fn digits_constructor() {
        let k = q5();
        let a = k.from_digits(&[1, 2], 0, 10).unwrap();
        assert_eq!(a, k.from_i64(11));
        let b = k.from_digits(&[3], -2, 10).unwrap();
        assert_eq!(b.valuation(), Valuation::int(-2));
        assert_eq!(b.shift(2), k.from_i64(3));
    }
}
