//! Extraction of the Sen operator `Theta = log(M) / log(c)` from the matrix
//! `M` of a topological generator with `chi = c`.

use num_rational::Rational64;

use crate::cyclotomic::CycloElement;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::padic::{vp_factorial, PadicElement};
use crate::ring::RingElem;
use crate::roots::find_roots;
use crate::valuation::Valuation;

#[derive(Clone, Debug)]
pub struct SenData {
    pub dim: usize,
    pub theta: Matrix<CycloElement>,
    /// Characteristic polynomial of `theta`, lowest degree first, monic.
    pub charpoly: Vec<CycloElement>,
    /// Number of terms `K` of the logarithm series that were summed.
    pub series_length: usize,
    /// Absolute precision at which `theta` is reported.
    pub precision: i64,
}

impl SenData {
    /// Eigenvalues of `theta` found in the base field, when the
    /// characteristic polynomial has base-field coefficients.
    pub fn weights(&self) -> Result<(Vec<(PadicElement, usize)>, Vec<String>)> {
        let coeffs = self
            .charpoly
            .iter()
            .map(|c| {
                if c.min_level() == 0 {
                    Ok(c.coeffs()[0].clone())
                } else {
                    Err(Error::NeedsExtension("characteristic polynomial is not defined over Q_p".into()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let (roots, missing) = find_roots(&coeffs)?;
        Ok((roots.into_iter().map(|r| (r.value, r.multiplicity)).collect(), missing))
    }
}

/// `n = v_p(c - 1)`, checked to be positive (at least 2 when `p = 2`).
pub fn character_level(c: &PadicElement) -> Result<i64> {
    let one = c.one_like();
    let d = c.sub_ref(&one);
    if d.is_zero() {
        return Err(Error::Domain("character value c = 1 gives no information".into()));
    }
    let n = d.val().expect("nonzero");
    let need = if c.prime() == 2 { 2 } else { 1 };
    if n < need {
        return Err(Error::Domain(format!("character value needs v(c - 1) >= {need}, got {n}")));
    }
    Ok(n)
}

/// Smallest `K` with `k v - v_p(k) >= target` for every `k > K`.
fn series_length(p: u64, v: Rational64, target: i64) -> usize {
    let ok = |k: i64| {
        Rational64::from_integer(k) * v
            - Rational64::from_integer(vp_factorial(p, k as u64) - vp_factorial(p, k as u64 - 1))
            >= Rational64::from_integer(target)
    };
    let mut k = 1i64;
    loop {
        if (k + 1..=4 * (k + 1) + p as i64).all(ok) {
            return k as usize;
        }
        k += 1;
    }
}

fn lifted_matrix(m: &Matrix<CycloElement>, work: i64) -> Matrix<CycloElement> {
    m.map(|a| a.lifted(work))
}

/// `log(1 + X)` summed on lifted entries; the result is correct to the
/// precision of `X` whenever `v(X) > 0` controls the series.
fn matrix_log(x: &Matrix<CycloElement>, target: i64) -> Result<(Matrix<CycloElement>, usize)> {
    let p = x.get(0, 0).prime();
    let v = match x.valuation() {
        Valuation::Infinite => return Ok((x.clone(), 0)),
        Valuation::Finite(v) => v,
    };
    if v <= Rational64::from_integer(0) {
        return Err(Error::Domain(format!("matrix logarithm diverges: v(M - I) = {v}")));
    }
    let k = series_length(p, v, target);
    let work = target + vp_factorial(p, k as u64) + 2;
    let xl = lifted_matrix(x, work);
    Ok((xl.log1p_series(k)?.map(|a| a.with_precision(target)), k))
}

/// `Theta = log(M) / log_p(c)`.
pub fn sen_operator(m: &Matrix<CycloElement>, c: &PadicElement) -> Result<SenData> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::InvalidInput("action matrix must be square and nonempty".into()));
    }
    let n = character_level(c)?;
    let d = m.rows();
    let t = m.get(0, 0);
    let target = m.precision().min(c.precision());
    let ident = Matrix::identity(d, t).map(|e| e.lifted(target));
    let x = m.sub(&ident);
    let (log_m, k) = matrix_log(&x, target)?;
    let log_c = c.log()?;
    let theta_prec = target - n;
    if theta_prec < 1 {
        return Err(Error::PrecisionExhausted(format!("Sen operator needs precision above {n}")));
    }
    let lc = t.from_scalar_like(&log_c);
    let theta = log_m.try_map(|a| a.try_div(&lc))?.map(|a| a.with_precision(theta_prec));
    let charpoly = theta.charpoly();
    Ok(SenData { dim: d, theta, charpoly, series_length: k, precision: theta_prec })
}

/// `exp(log(c) Theta)`, the action matrix of `gamma` with `chi(gamma) = c`.
pub fn action_matrix(theta: &Matrix<CycloElement>, c: &PadicElement, prec: i64) -> Result<Matrix<CycloElement>> {
    character_level(c)?;
    let p = c.prime();
    let lc = c.lifted(prec).log()?;
    let scaled = theta.map(|a| a.lifted(prec)).scale(&lc);
    let v = match scaled.valuation() {
        Valuation::Infinite => return Ok(Matrix::identity(theta.rows(), theta.get(0, 0)).map(|e| e.lifted(prec))),
        Valuation::Finite(v) => v,
    };
    let min_v = Rational64::new(1, p as i64 - 1);
    if v <= min_v || (p == 2 && v < Rational64::from_integer(2)) {
        return Err(Error::Domain(format!("matrix exponential diverges: v = {v}")));
    }
    // v(A^k/k!) >= k v - (k-1)/(p-1)
    let mut k = 1usize;
    while Rational64::from_integer(k as i64 + 1) * (v - min_v) + min_v < Rational64::from_integer(prec) {
        k += 1;
    }
    let work = prec + vp_factorial(p, k as u64) + 2;
    let al = scaled.map(|a| a.lifted(work));
    Ok(al.exp_series(k)?.map(|a| a.with_precision(prec)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cyclotomic::CycloField;
    use crate::padic::PadicField;

    fn cf(p: u64, cap: i64) -> CycloField {
        CycloField::new(&PadicField::qp(p, cap).unwrap(), 0).unwrap()
    }

    #[test]
    fn identity_gives_zero() {
        let k = cf(5, 20);
        let m = Matrix::identity(2, &k.one());
        let c = k.base().from_i64(6);
        let s = sen_operator(&m, &c).unwrap();
        assert!(s.theta.is_zero());
        assert!(sen_operator(&m, &k.base().one()).is_err());
    }

    #[test]
    fn diagonal_round_trip() {
        let k = cf(5, 20);
        let c = k.base().from_i64(6);
        let theta = Matrix::diagonal(&[k.from_i64(0), k.from_i64(1)]);
        let m = action_matrix(&theta, &c, 20).unwrap();
        let s = sen_operator(&m, &c).unwrap();
        assert!(s.theta.eq_at_precision(&theta));
        assert_eq!(s.precision, 19);
        let (w, missing) = s.weights().unwrap();
        assert!(missing.is_empty());
        let mut vals: Vec<i64> = w.iter().map(|(r, _)| r.to_signed_bigint().unwrap().try_into().unwrap()).collect();
        vals.sort();
        assert_eq!(vals, vec![0, 1]);
    }

    #[test]
    fn scalar_power() {
        let k = cf(3, 20);
        let c = k.base().from_i64(4);
        let s = 2;
        let cs = c.pow_i64(-s).unwrap();
        let m = Matrix::diagonal(&[k.scalar(&cs), k.scalar(&cs)]);
        let out = sen_operator(&m, &c).unwrap();
        let expected = Matrix::diagonal(&[k.from_i64(-s), k.from_i64(-s)]);
        assert!(out.theta.eq_at_precision(&expected));
    }

    #[test]
    fn rejects_non_unipotent() {
        let k = cf(5, 20);
        let m = Matrix::diagonal(&[k.from_i64(2), k.one()]);
        assert!(matches!(sen_operator(&m, &k.base().from_i64(6)), Err(Error::Domain(_))));
    }
}
