//! The truncated model `K_m[[t]] / t^N` of the `H_K`-invariants of `B_dR^+`,
//! with `g(t) = chi(g) t`, the map `theta` and the connection `t d/dt`.

use std::fmt;

use crate::cyclotomic::{CycloElement, CycloField};
use crate::error::{Error, Result};
use crate::padic::PadicElement;
use crate::ring::RingElem;
use crate::series::TruncSeries;
use crate::valuation::Valuation;

/// `sum_{i<N} a_i t^i` with coefficients in `K_m`.
#[derive(Clone)]
pub struct BdRElement {
    series: TruncSeries<CycloElement>,
}

impl BdRElement {
    /// Element with the given coefficients, truncated to `n_t` terms.
    pub fn new(coeffs: Vec<CycloElement>, n_t: usize, field: &CycloField) -> Result<Self> {
        if n_t == 0 {
            return Err(Error::InvalidInput("t-truncation must be at least 1".into()));
        }
        let m = field.level();
        let coeffs = coeffs.into_iter().map(|c| c.embed_level(m)).collect::<Result<Vec<_>>>()?;
        Ok(BdRElement { series: TruncSeries::new(coeffs, n_t - 1, &field.zero()) })
    }

    pub fn from_series(series: TruncSeries<CycloElement>) -> Self {
        BdRElement { series }
    }

    pub fn constant(c: CycloElement, n_t: usize) -> Self {
        BdRElement { series: TruncSeries::constant(c, n_t.max(1) - 1) }
    }

    /// The period `t`.
    pub fn t(field: &CycloField, n_t: usize) -> Self {
        BdRElement { series: TruncSeries::var(n_t.max(1) - 1, &field.zero()) }
    }

    pub fn series(&self) -> &TruncSeries<CycloElement> {
        &self.series
    }

    pub fn coeffs(&self) -> &[CycloElement] {
        self.series.coeffs()
    }

    pub fn coeff(&self, i: usize) -> &CycloElement {
        self.series.coeff(i)
    }

    /// Number of stored coefficients `N`.
    pub fn trunc_len(&self) -> usize {
        self.series.trunc() + 1
    }

    pub fn level(&self) -> u32 {
        self.series.template().level()
    }

    pub fn cyclo_field(&self) -> &CycloField {
        self.series.template().field()
    }

    pub fn add(&self, other: &Self) -> Self {
        BdRElement { series: self.series.add(&other.series) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        BdRElement { series: self.series.sub(&other.series) }
    }

    pub fn neg(&self) -> Self {
        BdRElement { series: self.series.neg() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        BdRElement { series: self.series.mul(&other.series) }
    }

    /// `a_0`.
    pub fn theta(&self) -> CycloElement {
        self.series.coeff(0).clone()
    }

    /// `sum chi_c(a_i) c^i t^i`.
    pub fn galois_act(&self, c: &PadicElement) -> Result<Self> {
        let mut ci = c.one_like().lifted(c.precision());
        let mut out = Vec::with_capacity(self.trunc_len());
        for a in self.coeffs() {
            out.push(a.chi_action(c)?.scale(&ci));
            ci = ci.mul_ref(c);
        }
        Ok(BdRElement { series: TruncSeries::new(out, self.series.trunc(), self.series.template()) })
    }

    /// `t d/dt`, i.e. `sum i a_i t^i`.
    pub fn nabla(&self) -> Self {
        BdRElement { series: self.series.euler() }
    }

    /// `d/dt`; the result has one fewer coefficient.
    pub fn d_dt(&self) -> Self {
        BdRElement { series: self.series.derive() }
    }

    /// Smallest `n` such that every coefficient lies in `K_n`.
    pub fn analytic_level(&self) -> u32 {
        self.coeffs().iter().map(|a| a.min_level()).max().unwrap_or(0)
    }

    /// The components `x_i = (1/i!) sum_k (-1)^k d^(i+k)x/dt^(i+k) t^k / k!`.
    ///
    /// `x_i` is returned as an element with `N - i` coefficients; it is the
    /// constant `a_i` at that truncation.
    pub fn decompose(&self) -> Result<Vec<BdRElement>> {
        let n = self.trunc_len();
        let mut derivs = vec![self.series.clone()];
        for _ in 1..n {
            let d = derivs.last().unwrap().derive();
            derivs.push(d);
        }
        let tmpl = self.series.template();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let len = n - i;
            let mut acc = TruncSeries::zero(len - 1, tmpl);
            let mut kfact = 1i64;
            for k in 0..len {
                if k > 0 {
                    kfact = kfact
                        .checked_mul(k as i64)
                        .ok_or_else(|| Error::InvalidInput("truncation too large".into()))?;
                }
                let d = derivs[i + k].with_trunc(len - 1);
                let term = d.shift_up(k);
                let term = term.try_map(|a| a.div_int(kfact))?;
                acc = if k % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            let ifact: i64 = (1..=i as i64).product();
            out.push(BdRElement { series: acc.try_map(|a| a.div_int(ifact))? });
        }
        Ok(out)
    }

    /// `sum x_i t^i` from the constant terms of the components.
    pub fn reconstruct(parts: &[BdRElement], field: &CycloField) -> Result<Self> {
        let coeffs = parts.iter().map(|x| x.theta()).collect();
        Self::new(coeffs, parts.len().max(1), field)
    }

    pub fn is_zero(&self) -> bool {
        self.series.is_zero()
    }

    pub fn eq_at_precision(&self, other: &Self) -> bool {
        self.series.eq_at_precision(&other.series)
    }
}

impl RingElem for BdRElement {
    fn zero_like(&self) -> Self {
        BdRElement { series: self.series.zero_like() }
    }
    fn one_like(&self) -> Self {
        BdRElement { series: self.series.one_like() }
    }
    fn from_i64_like(&self, n: i64) -> Self {
        BdRElement { series: self.series.from_i64_like(n) }
    }
    fn from_scalar_like(&self, c: &PadicElement) -> Self {
        BdRElement { series: self.series.from_scalar_like(c) }
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
        BdRElement { series: self.series.scale(c) }
    }
    fn is_zero(&self) -> bool {
        self.series.is_zero()
    }
    fn try_div(&self, other: &Self) -> Result<Self> {
        Ok(BdRElement { series: self.series.try_div(&other.series)? })
    }
    fn div_int(&self, n: i64) -> Result<Self> {
        Ok(BdRElement { series: self.series.div_int(n)? })
    }
    fn valuation(&self) -> Valuation {
        self.series.valuation()
    }
    fn precision(&self) -> i64 {
        self.series.precision()
    }
    fn with_precision(&self, prec: i64) -> Self {
        BdRElement { series: self.series.with_precision(prec) }
    }
    fn lifted(&self, prec: i64) -> Self {
        BdRElement { series: self.series.lifted(prec) }
    }
    fn prime(&self) -> u64 {
        self.series.prime()
    }
}

impl PartialEq for BdRElement {
    fn eq(&self, other: &Self) -> bool {
        self.eq_at_precision(other)
    }
}

impl fmt::Display for BdRElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("[{c}]"),
                1 => format!("[{c}]*t"),
                _ => format!("[{c}]*t^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0 + O(t^{})", self.trunc_len())
        } else {
            write!(f, "{} + O(t^{})", terms.join(" + "), self.trunc_len())
        }
    }
}

impl fmt::Debug for BdRElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BdR_{}[{}]", self.level(), self)
    }
}
