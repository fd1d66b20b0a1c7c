//! Power series `sum a_k u^k` over a coefficient ring with a `Gamma`-action,
//! twisted by `g(u) = u + log chi(g)`.
//!
//! Elements produced by [`section`] are truncations of genuine infinite
//! series. They carry a growth bound `v(a_k) >= alpha - k beta`, which lets
//! [`uadj_act`] report how much precision the discarded tail can affect.

use std::fmt;

use num_rational::Rational64;

use crate::bdr::BdRElement;
use crate::cyclotomic::{CycloElement, CycloField};
use crate::error::{Error, Result};
use crate::padic::{vp_factorial, PadicElement};
use crate::ring::RingElem;
use crate::sen::character_level;
use crate::series::TruncSeries;
use crate::valuation::Valuation;

/// A coefficient ring with a continuous action of `Z_p^x` (through `chi`) and
/// its derivative `nabla`.
pub trait GammaRing: RingElem + fmt::Display {
    fn apply_group(&self, c: &PadicElement) -> Result<Self>;
    fn apply_nabla(&self) -> Self;
    /// `g` with `v(nabla z) >= v(z) - g` for all `z`.
    fn nabla_growth(&self) -> Rational64 {
        Rational64::from_integer(0)
    }
    /// Smallest `n` for which the orbit map can be analytic on `1 + p^n Z_p`.
    fn min_level(&self) -> u32 {
        0
    }
}

impl GammaRing for PadicElement {
    fn apply_group(&self, _c: &PadicElement) -> Result<Self> {
        Ok(self.clone())
    }
    fn apply_nabla(&self) -> Self {
        self.zero_like().with_precision(self.precision())
    }
}

impl GammaRing for CycloElement {
    fn apply_group(&self, c: &PadicElement) -> Result<Self> {
        self.chi_action(c)
    }
    fn apply_nabla(&self) -> Self {
        self.zero_like().with_precision(self.precision())
    }
    fn min_level(&self) -> u32 {
        CycloElement::min_level(self)
    }
}

impl GammaRing for BdRElement {
    fn apply_group(&self, c: &PadicElement) -> Result<Self> {
        self.galois_act(c)
    }
    fn apply_nabla(&self) -> Self {
        self.nabla()
    }
    fn min_level(&self) -> u32 {
        self.analytic_level()
    }
}

/// Compare `apply_group(c, z)` with `sum_k log(c)^k nabla^k(z) / k!`.
pub fn nabla_consistent<R: GammaRing>(z: &R, c: &PadicElement, terms: usize) -> Result<bool> {
    let lam = c.log()?;
    let mut term = z.clone();
    let mut sum = z.clone();
    for k in 1..=terms {
        term = term.apply_nabla().scale(&lam).div_int(k as i64)?;
        sum = sum.add_ref(&term);
    }
    Ok(z.apply_group(c)?.eq_at_precision(&sum))
}

/// Lower bound `v(a_k) >= alpha - k beta` for the untruncated series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Growth {
    pub alpha: Rational64,
    pub beta: Rational64,
}

/// `sum_{k<=M} a_k u^k` at level `n`.
#[derive(Clone)]
pub struct UAdjElement<R> {
    level: u32,
    series: TruncSeries<R>,
    /// `None` means the series is a polynomial in `u` (no tail).
    growth: Option<Growth>,
}

impl<R: GammaRing> UAdjElement<R> {
    /// A polynomial in `u` (exact, no tail beyond degree `M`).
    pub fn polynomial(coeffs: Vec<R>, level: u32, m: usize, template: &R) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidInput("level must be at least 1".into()));
        }
        if coeffs.len() > m + 1 && coeffs[m + 1..].iter().any(|c| !c.is_zero()) {
            return Err(Error::InvalidInput(format!("polynomial has degree above the truncation {m}")));
        }
        Ok(UAdjElement { level, series: TruncSeries::new(coeffs, m, template), growth: None })
    }

    pub fn constant(a: R, level: u32, m: usize) -> Result<Self> {
        let t = a.clone();
        Self::polynomial(vec![a], level, m, &t)
    }

    /// The variable `u`.
    pub fn u(level: u32, m: usize, template: &R) -> Result<Self> {
        Self::polynomial(vec![template.zero_like(), template.one_like()], level, m.max(1), template)
    }

    pub fn with_growth(series: TruncSeries<R>, level: u32, growth: Option<Growth>) -> Self {
        UAdjElement { level, series, growth }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn trunc(&self) -> usize {
        self.series.trunc()
    }

    pub fn series(&self) -> &TruncSeries<R> {
        &self.series
    }

    pub fn coeffs(&self) -> &[R] {
        self.series.coeffs()
    }

    pub fn growth(&self) -> Option<Growth> {
        self.growth
    }

    pub fn add(&self, other: &Self) -> Self {
        UAdjElement {
            level: self.level.max(other.level),
            series: self.series.add(&other.series),
            growth: combine_add(self.growth, other.growth, &self.series, &other.series),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        UAdjElement { level: self.level, series: self.series.neg(), growth: self.growth }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let growth = match (self.growth, other.growth) {
            (None, None) => None,
            (a, b) => {
                let ga = a.unwrap_or_else(|| poly_growth(&self.series));
                let gb = b.unwrap_or_else(|| poly_growth(&other.series));
                Some(Growth { alpha: ga.alpha + gb.alpha, beta: ga.beta.max(gb.beta) })
            }
        };
        UAdjElement { level: self.level.max(other.level), series: self.series.mul(&other.series), growth }
    }

    pub fn pow(&self, e: u32) -> Self {
        let one = self.series.template().one_like();
        let mut acc = UAdjElement { level: self.level, series: TruncSeries::constant(one, self.trunc()), growth: None };
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.series.is_zero()
    }

    pub fn eq_at_precision(&self, other: &Self) -> bool {
        self.series.eq_at_precision(&other.series)
    }
}

fn val_floor<R: RingElem>(a: &R) -> Rational64 {
    match a.valuation() {
        Valuation::Finite(v) => v.min(Rational64::from_integer(a.precision())),
        Valuation::Infinite => Rational64::from_integer(a.precision()),
    }
}

/// Growth bound of a polynomial: all tail coefficients vanish, so any `beta`
/// works; use the minimal coefficient valuation with `beta = 0`.
fn poly_growth<R: RingElem>(s: &TruncSeries<R>) -> Growth {
    let alpha = s.coeffs().iter().map(val_floor).min().unwrap();
    Growth { alpha, beta: Rational64::from_integer(0) }
}

fn combine_add<R: RingElem>(
    a: Option<Growth>,
    b: Option<Growth>,
    sa: &TruncSeries<R>,
    sb: &TruncSeries<R>,
) -> Option<Growth> {
    match (a, b) {
        (None, None) => None,
        (a, b) => {
            let ga = a.unwrap_or_else(|| poly_growth(sa));
            let gb = b.unwrap_or_else(|| poly_growth(sb));
            Some(Growth { alpha: ga.alpha.min(gb.alpha), beta: ga.beta.max(gb.beta) })
        }
    }
}

/// `g(sum a_k u^k) = sum g(a_k) (u + log c)^k`.
///
/// For series with a growth bound, output coefficient `j` is reported to at
/// most `alpha - j v(l) + (M+1)(v(l) - beta)`, the valuation of the
/// contribution of the discarded terms `k > M`.
pub fn uadj_act<R: GammaRing>(c: &PadicElement, z: &UAdjElement<R>) -> Result<UAdjElement<R>> {
    if c.sub_ref(&c.one_like()).is_zero() {
        return Ok(z.clone());
    }
    let n = character_level(c)?;
    if n < z.level as i64 {
        return Err(Error::Domain(format!("character value {c} has v(c - 1) = {n}, below the level {}", z.level)));
    }
    let m = z.trunc();
    let lam = c.log()?;
    let moved: Vec<R> = z.coeffs().iter().map(|a| a.apply_group(c)).collect::<Result<_>>()?;
    let tmpl = z.series.template();
    let exact = z.series.precision().max(lam.precision()) + 64;
    let mut lam_pows = vec![lam.one_like().lifted(exact)];
    for i in 1..=m {
        let next = lam_pows[i - 1].mul_ref(&lam);
        lam_pows.push(next);
    }
    let vlam = lam.val().map(Rational64::from_integer);
    let mut out = Vec::with_capacity(m + 1);
    for j in 0..=m {
        let mut binom = num_bigint::BigInt::from(1);
        let mut acc = tmpl.zero_like();
        for (k, a) in moved.iter().enumerate().skip(j) {
            let coef = lam_pows[k - j].mul_ref(&lam.field().from_bigint(&binom).lifted(exact));
            acc = acc.add_ref(&a.scale(&coef));
            binom = binom * (k + 1) / (k + 1 - j);
        }
        if let (Some(g), Some(vl)) = (z.growth, vlam) {
            let bound = g.alpha - Rational64::from_integer(j as i64) * vl
                + Rational64::from_integer(m as i64 + 1) * (vl - g.beta);
            acc = acc.with_precision(bound.floor().to_integer());
        }
        out.push(acc);
    }
    Ok(UAdjElement { level: z.level, series: TruncSeries::new(out, m, tmpl), growth: z.growth })
}

/// `nabla_u = -d/du`; the result is truncated at `u^(M-1)`.
pub fn nabla_u<R: GammaRing>(z: &UAdjElement<R>) -> UAdjElement<R> {
    let growth = z.growth.map(|g| Growth { alpha: g.alpha - g.beta, beta: g.beta });
    UAdjElement { level: z.level, series: z.series.derive().neg(), growth }
}

/// `sum_k (nabla a_k + (k+1) a_{k+1}) u^k` for `k < M`: the derivative of the
/// twisted action, which vanishes exactly on invariants.
pub fn total_connection<R: GammaRing>(z: &UAdjElement<R>) -> TruncSeries<R> {
    let m = z.trunc();
    let tmpl = z.series.template();
    if m == 0 {
        return TruncSeries::zero(0, tmpl);
    }
    let coeffs: Vec<R> = (0..m)
        .map(|k| {
            let a = z.series.coeff(k).apply_nabla();
            let b = z.series.coeff(k + 1).mul_ref(&tmpl.from_i64_like(k as i64 + 1));
            a.add_ref(&b)
        })
        .collect();
    TruncSeries::new(coeffs, m - 1, tmpl)
}

/// `sum_{i<=M} (-1)^i nabla^i(z0) / i! u^i`.
pub fn section<R: GammaRing>(z0: &R, level: u32, m: usize) -> Result<UAdjElement<R>> {
    if level == 0 {
        return Err(Error::InvalidInput("level must be at least 1".into()));
    }
    let p = z0.prime();
    let mut out = vec![z0.clone()];
    for i in 1..=m {
        let a = out[i - 1].apply_nabla().neg_ref().div_int(i as i64).map_err(|e| match e {
            Error::DivisionByZero => Error::PrecisionExhausted(format!("precision exhausted at u^{i}")),
            other => other,
        })?;
        out.push(a);
    }
    let alpha = val_floor(z0);
    let beta = z0.nabla_growth() + Rational64::new(1, p as i64 - 1);
    let growth = Some(Growth { alpha, beta });
    Ok(UAdjElement { level, series: TruncSeries::new(out, m, z0), growth })
}

/// `a_0`.
pub fn project0<R: GammaRing>(z: &UAdjElement<R>) -> R {
    z.series.coeff(0).clone()
}

/// Invariance under each sampled character value, and vanishing of the
/// total connection.
pub fn is_invariant<R: GammaRing>(z: &UAdjElement<R>, samples: &[PadicElement]) -> Result<bool> {
    if !total_connection(z).is_zero() {
        return Ok(false);
    }
    for c in samples {
        if !uadj_act(c, z)?.eq_at_precision(z) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Diagnostic of the coefficient-growth test.
#[derive(Clone, Debug)]
pub struct AnalyticReport {
    pub analytic: bool,
    /// `v(nabla^i(z0) / i!)` for `i = 0..=M`.
    pub table: Vec<Valuation>,
    pub slack: i64,
    /// Smallest level allowed by the coefficients themselves.
    pub min_level: u32,
}

/// Default slack `v_p(floor(M / (p-1))!)`.
pub fn default_slack(p: u64, m: usize) -> i64 {
    vp_factorial(p, m as u64 / (p - 1))
}

/// `v(nabla^i(z0)/i!) + n i >= v(z0) - slack` for `i <= M`.
pub fn gamma_n_analytic_test<R: GammaRing>(z0: &R, n: u32, m: usize, slack: Option<i64>) -> Result<AnalyticReport> {
    let p = z0.prime();
    let slack = slack.unwrap_or_else(|| default_slack(p, m));
    let mut table = Vec::with_capacity(m + 1);
    let mut iter = z0.clone();
    for i in 0..=m {
        if i > 0 {
            iter = iter.apply_nabla();
        }
        let v = match iter.valuation() {
            Valuation::Finite(v) => Valuation::Finite(v - Rational64::from_integer(vp_factorial(p, i as u64))),
            Valuation::Infinite => Valuation::Infinite,
        };
        table.push(v);
    }
    let base = table[0];
    let min_level = z0.min_level();
    let mut analytic = min_level <= n;
    if let Valuation::Finite(v0) = base {
        let threshold = v0 - Rational64::from_integer(slack);
        for (i, v) in table.iter().enumerate() {
            if let Valuation::Finite(vi) = v {
                if *vi + Rational64::from_integer(n as i64 * i as i64) < threshold {
                    analytic = false;
                }
            }
        }
    }
    Ok(AnalyticReport { analytic, table, slack, min_level })
}

/// Sample admissible character values `1 + k p^n`, `k = 1..=count`, skipping
/// multiples of `p` in `k` so that each has `v(c-1) = n` exactly.
pub fn admissible_samples(field: &crate::padic::PadicField, n: u32, count: usize) -> Vec<PadicElement> {
    let p = field.p() as i64;
    let base = if p == 2 { n.max(2) } else { n };
    (1i64..)
        .filter(|k| k % p != 0)
        .take(count)
        .map(|k| field.one().add_ref(&field.from_i64(k).shift(base as i64)))
        .collect()
}

/// Basis `{x^k : k < N_t}` of the invariants of `B_dR^+{{u}}_n` at
/// t-truncation `N_t` and u-truncation `M`, with `x = t e^{-u}`.
pub fn bdr_uadj_invariants(field: &CycloField, n: u32, n_t: usize, m: usize) -> Result<Vec<UAdjElement<BdRElement>>> {
    if n as i64 > field.level() as i64 {
        return Err(Error::InvalidInput(format!("level {n} exceeds the coefficient level {}", field.level())));
    }
    let t = BdRElement::t(field, n_t);
    let x = section(&t, n.max(1), m)?;
    let samples = admissible_samples(field.base(), n.max(1), 3);
    let mut out = Vec::with_capacity(n_t);
    for k in 0..n_t {
        let xk = x.pow(k as u32);
        if !is_invariant(&xk, &samples)? {
            return Err(Error::Precondition(format!("x^{k} failed the invariance check")));
        }
        out.push(xk);
    }
    Ok(out)
}

/// `theta` applied coefficientwise.
pub fn theta_image(z: &UAdjElement<BdRElement>) -> UAdjElement<CycloElement> {
    let coeffs: Vec<CycloElement> = z.coeffs().iter().map(|a| a.theta()).collect();
    let tmpl = coeffs[0].clone();
    UAdjElement { level: z.level, series: TruncSeries::new(coeffs, z.trunc(), &tmpl), growth: z.growth }
}

impl<R: GammaRing> fmt::Display for UAdjElement<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("({c})"),
                1 => format!("({c})*u"),
                _ => format!("({c})*u^{k}"),
            })
            .collect();
        let body = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        write!(f, "{body} + O(u^{})", self.trunc() + 1)
    }
}

impl<R: GammaRing> fmt::Debug for UAdjElement<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UAdj_{}[{}]", self.level, self)
    }
}
