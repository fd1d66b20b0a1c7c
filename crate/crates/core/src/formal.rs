//! Classical formal series: `log(1+T)`, `exp(T)`, binomial series and the
//! Lubin–Tate series attached to `[p](T) = T^q + pT`.

use crate::error::{Error, Result};
use crate::padic::{PadicElement, PadicField};
use crate::series::TruncSeries;

/// `sum_{k=1}^{N} (-1)^(k+1) T^k / k`; coefficient `k` loses `v_p(k)` digits.
pub fn formal_log_mult(field: &PadicField, n: usize) -> Result<TruncSeries<PadicElement>> {
    if n < 1 {
        return Err(Error::InvalidInput("truncation degree must be at least 1".into()));
    }
    let one = field.one();
    let coeffs = (0..=n)
        .map(|k| {
            if k == 0 {
                Ok(field.zero())
            } else {
                let c = one.div_i64(k as i64)?;
                Ok(if k % 2 == 1 { c } else { c.neg_ref() })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TruncSeries::new(coeffs, n, &one))
}

/// `sum_{k=0}^{N} T^k / k!`.
pub fn formal_exp(field: &PadicField, n: usize) -> Result<TruncSeries<PadicElement>> {
    let mut coeffs = vec![field.one()];
    for k in 1..=n {
        let prev = coeffs[k - 1].clone();
        coeffs.push(prev.div_i64(k as i64)?);
    }
    Ok(TruncSeries::new(coeffs, n, &field.one()))
}

/// `(1+T)^c - 1 = sum_{k>=1} binom(c, k) T^k` for `c` in `Z_p`.
pub fn binomial_minus_one(c: &PadicElement, n: usize) -> Result<TruncSeries<PadicElement>> {
    if c.valuation().is_negative() {
        return Err(Error::Domain("binomial exponent must lie in Z_p".into()));
    }
    let field = c.field();
    let mut coeffs = vec![field.zero()];
    let mut b = field.one();
    for k in 1..=n {
        let num = c.sub_ref(&field.from_i64(k as i64 - 1));
        b = b.mul_ref(&num).div_i64(k as i64)?;
        coeffs.push(b.clone());
    }
    Ok(TruncSeries::new(coeffs, n, &field.one()))
}

fn check_q(field: &PadicField, q: u64) -> Result<u32> {
    let p = field.p();
    let mut e = 0;
    let mut x = q;
    while x > 1 && x % p == 0 {
        x /= p;
        e += 1;
    }
    if x != 1 || e == 0 {
        return Err(Error::InvalidInput(format!("q = {q} is not a positive power of p = {p}")));
    }
    Ok(e)
}

/// The Lubin–Tate endomorphism `[p](T) = T^q + pT`.
pub fn lt_p_series(field: &PadicField, q: u64, n: usize) -> Result<TruncSeries<PadicElement>> {
    check_q(field, q)?;
    let mut s = TruncSeries::monomial(1, field.p_power(1), n);
    if (q as usize) <= n {
        s.set_coeff(q as usize, field.one());
    }
    Ok(s)
}

/// Outcome of the limit computation of the Lubin–Tate logarithm.
#[derive(Clone, Debug)]
pub struct LtLog {
    pub series: TruncSeries<PadicElement>,
    /// Number of iterations `k` of `[p]` used for `[p^k](T)/p^k`.
    pub iterations: usize,
}

/// `log_LT = lim_k [p]^{∘k}(T) / p^k`, computed until two consecutive
/// iterates agree at the field's precision cap.
pub fn lubin_tate_log_detailed(field: &PadicField, q: u64, n: usize) -> Result<LtLog> {
    check_q(field, q)?;
    if n < 1 {
        return Err(Error::InvalidInput("truncation degree must be at least 1".into()));
    }
    let target = field.cap();
    let mut budget = (2 * target + 2 * n as i64 + 8) as usize;
    loop {
        let work = field.with_cap(target + budget as i64 + 1)?;
        let pser = lt_p_series(&work, q, n)?;
        let mut iter = TruncSeries::var(n, &work.one());
        let mut prev: Option<TruncSeries<PadicElement>> = None;
        let mut agreed = 0;
        for k in 1..=budget {
            iter = pser.compose(&iter)?;
            let quotient = iter.try_map(|c| Ok(c.shift(-(k as i64)).with_precision(target)))?;
            if let Some(pr) = &prev {
                if pr.eq_at_precision(&quotient) {
                    agreed += 1;
                    if agreed >= 2 {
                        return Ok(LtLog { series: quotient, iterations: k });
                    }
                } else {
                    agreed = 0;
                }
            }
            prev = Some(quotient);
        }
        budget *= 2;
        if budget > 100_000 {
            return Err(Error::PrecisionExhausted("Lubin-Tate logarithm did not stabilise".into()));
        }
    }
}

pub fn lubin_tate_log(field: &PadicField, q: u64, n: usize) -> Result<TruncSeries<PadicElement>> {
    Ok(lubin_tate_log_detailed(field, q, n)?.series)
}

/// Compositional inverse of [`lubin_tate_log`].
pub fn lubin_tate_exp(field: &PadicField, q: u64, n: usize) -> Result<TruncSeries<PadicElement>> {
    lubin_tate_log(field, q, n)?.reversion()
}

/// `[a](T) = exp_LT(a log_LT(T))` for `a` in the valuation ring.
pub fn lt_multiplication(a: &PadicElement, q: u64, n: usize) -> Result<TruncSeries<PadicElement>> {
    if a.valuation().is_negative() {
        return Err(Error::Domain("Lubin-Tate multiplication needs an integral scalar".into()));
    }
    let field = a.field();
    let log = lubin_tate_log(field, q, n)?;
    let exp = log.reversion()?;
    exp.compose(&log.scale(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_of_one_plus_t() {
        let k = PadicField::qp(5, 20).unwrap();
        let l = formal_log_mult(&k, 1).unwrap();
        assert!(l.eq_at_precision(&TruncSeries::var(1, &k.one())));
        let l = formal_log_mult(&k, 8).unwrap();
        let inv = TruncSeries::new(vec![k.one(), k.one()], 7, &k.one()).invert().unwrap();
        assert!(l.derive().eq_at_precision(&inv));
        let e = formal_exp(&k, 8).unwrap();
        let em1 = e.sub(&TruncSeries::constant(k.one(), 8));
        assert!(l.compose(&em1).unwrap().eq_at_precision(&TruncSeries::var(8, &k.one())));
    }

    #[test]
    fn lubin_tate_identities() {
        let k = PadicField::qp(3, 12).unwrap();
        let n = 10;
        let log = lubin_tate_log(&k, 3, n).unwrap();
        assert_eq!(log.coeff(1), &k.one());
        assert!(log.coeff(0).is_zero());
        let pser = lt_p_series(&k, 3, n).unwrap();
        let lhs = log.compose(&pser).unwrap();
        let rhs = log.scale(&k.p_power(1));
        assert!(lhs.eq_at_precision(&rhs));
        let exp = lubin_tate_exp(&k, 3, n).unwrap();
        assert!(exp.compose(&log).unwrap().eq_at_precision(&TruncSeries::var(n, &k.one())));
    }

    #[test]
    fn lt_multiplication_examples() {
        let k = PadicField::qp(3, 12).unwrap();
        let n = 7;
        let one = lt_multiplication(&k.one(), 3, n).unwrap();
        assert!(one.eq_at_precision(&TruncSeries::var(n, &k.one())));
        let p = lt_multiplication(&k.p_power(1), 3, n).unwrap();
        assert!(p.eq_at_precision(&lt_p_series(&k, 3, n).unwrap()));
        let two = lt_multiplication(&k.from_i64(2), 3, n).unwrap();
        let five = lt_multiplication(&k.from_i64(5), 3, n).unwrap();
        let ten = lt_multiplication(&k.from_i64(10), 3, n).unwrap();
        assert!(two.compose(&five).unwrap().eq_at_precision(&ten));
        assert!(lt_multiplication(&k.p_power(-1), 3, n).is_err());
        assert!(lt_p_series(&k, 6, n).is_err());
    }
}
