//! Roots of polynomials over a p-adic coefficient field.
//!
//! Newton polygon slopes give the root valuations; on each slope the unit
//! roots are located residue by residue and refined by Newton iteration or,
//! for clustered residues, by recursive substitution `Y = r + pZ`.

use crate::error::{Error, Result};
use crate::linalg::poly_eval;
use crate::newton::lower_hull;
use crate::padic::{PadicElement, PadicField};
use crate::valuation::Valuation;

/// A root together with the number of roots it stands for at working precision.
#[derive(Clone, Debug)]
pub struct Root {
    pub value: PadicElement,
    pub multiplicity: usize,
}

const MAX_RESIDUES: u64 = 100_000;

fn derivative(q: &[PadicElement]) -> Vec<PadicElement> {
    q.iter().enumerate().skip(1).map(|(k, c)| c.mul_i64(k as i64)).collect()
}

/// Coefficients of `q(r + Y)`.
fn taylor_shift(q: &[PadicElement], r: &PadicElement) -> Vec<PadicElement> {
    let mut c = q.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = c[j + 1].mul_ref(r);
            c[j] = c[j].add_ref(&t);
        }
    }
    c
}

/// Divide by the content `p^min v` so that some coefficient is a unit.
fn normalize(q: &[PadicElement]) -> Option<Vec<PadicElement>> {
    let vmin = q.iter().filter_map(|c| c.val()).min()?;
    Some(q.iter().map(|c| c.shift(-vmin)).collect())
}

fn newton_lift(q: &[PadicElement], start: PadicElement) -> Result<PadicElement> {
    let dq = derivative(q);
    let mut y = start;
    for _ in 0..64 {
        let qy = poly_eval(q, &y);
        if qy.is_zero() {
            break;
        }
        let step = qy.checked_div(&poly_eval(&dq, &y))?;
        if step.is_zero() {
            break;
        }
        y = y.sub_ref(&step);
    }
    Ok(y)
}

fn integral_roots(field: &PadicField, q: &[PadicElement], units_only: bool, depth: usize) -> Result<Vec<Root>> {
    let Some(q) = normalize(q) else { return Ok(Vec::new()) };
    let mut out = Vec::new();
    for r in field.residues() {
        if units_only && r.iter().all(|&d| d == 0) {
            continue;
        }
        let lift = field.residue_lift(&r);
        let t = taylor_shift(&q, &lift);
        let mult = t.iter().position(|c| c.val() == Some(0)).unwrap_or(0);
        if mult == 0 {
            continue;
        }
        if mult == 1 {
            out.push(Root { value: newton_lift(&q, lift)?, multiplicity: 1 });
            continue;
        }
        let scaled: Vec<PadicElement> = t.iter().enumerate().map(|(j, c)| c.shift(j as i64)).collect();
        let resolved = match normalize(&scaled) {
            Some(s) if depth < 256 && s.iter().take(mult + 1).all(|c| c.precision() >= 1) => Some(s),
            _ => None,
        };
        match resolved {
            None => out.push(Root { value: lift, multiplicity: mult }),
            Some(s) => {
                for sub in integral_roots(field, &s, false, depth + 1)? {
                    out.push(Root { value: lift.add_ref(&sub.value.shift(1)), multiplicity: sub.multiplicity });
                }
            }
        }
    }
    Ok(out)
}

/// All roots in the coefficient field, or the roots found so far when some
/// require a scalar extension (second component lists the missing data).
pub fn find_roots(poly: &[PadicElement]) -> Result<(Vec<Root>, Vec<String>)> {
    let mut coeffs = poly.to_vec();
    while coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
    if coeffs.is_empty() {
        return Err(Error::InvalidInput("root finding for the zero polynomial".into()));
    }
    let field = coeffs[0].field().clone();
    if field.residue_size() > MAX_RESIDUES {
        return Err(Error::Precondition(format!(
            "residue field of size {} is too large for root enumeration",
            field.residue_size()
        )));
    }
    let mut roots = Vec::new();
    let zeros = coeffs.iter().take_while(|c| c.is_zero()).count();
    if zeros > 0 {
        let prec = coeffs[..zeros].iter().map(|c| c.precision()).min().unwrap();
        roots.push(Root { value: field.zero_with_prec(prec), multiplicity: zeros });
        coeffs.drain(..zeros);
    }
    let mut missing = Vec::new();
    let points: Vec<(i64, i64)> =
        coeffs.iter().enumerate().filter_map(|(k, c)| c.val().map(|v| (k as i64, v))).collect();
    for seg in lower_hull(&points).windows(2) {
        let (k0, v0) = seg[0];
        let (k1, v1) = seg[1];
        let len = (k1 - k0) as usize;
        if (v0 - v1) % (k1 - k0) != 0 {
            missing.push(format!(
                "{len} root(s) of valuation {} need a ramified extension",
                Valuation::ratio(v0 - v1, k1 - k0)
            ));
            continue;
        }
        let s = (v0 - v1) / (k1 - k0);
        let scaled: Vec<PadicElement> = coeffs.iter().enumerate().map(|(k, c)| c.shift(s * k as i64)).collect();
        let found = integral_roots(&field, &scaled, true, 0)?;
        let count: usize = found.iter().map(|r| r.multiplicity).sum();
        if count < len {
            missing.push(format!("{} root(s) of valuation {s} need an unramified extension", len - count));
        }
        roots.extend(found.into_iter().map(|r| Root { value: r.value.shift(s), multiplicity: r.multiplicity }));
    }
    Ok((roots, missing))
}

/// All roots, failing with [`Error::NeedsExtension`] if some lie outside the field.
pub fn roots_in_field(poly: &[PadicElement]) -> Result<Vec<Root>> {
    let (roots, missing) = find_roots(poly)?;
    if !missing.is_empty() {
        return Err(Error::NeedsExtension(missing.join("; ")));
    }
    Ok(roots)
}

/// Distinct simple roots, failing on clusters or missing roots.
pub fn simple_roots(poly: &[PadicElement]) -> Result<Vec<PadicElement>> {
    let roots = roots_in_field(poly)?;
    if let Some(r) = roots.iter().find(|r| r.multiplicity > 1) {
        return Err(Error::Precondition(format!(
            "repeated root {} (multiplicity {}) at working precision",
            r.value, r.multiplicity
        )));
    }
    Ok(roots.into_iter().map(|r| r.value).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::poly_mul;

    fn from_roots(k: &PadicField, rs: &[PadicElement]) -> Vec<PadicElement> {
        rs.iter().fold(vec![k.one()], |acc, r| poly_mul(&acc, &[r.neg_ref(), k.one()]))
    }

    #[test]
    fn recovers_integer_roots_with_valuations() {
        let k = PadicField::qp(5, 20).unwrap();
        let rs = [k.from_i64(1), k.from_i64(5), k.from_i64(2), k.from_i64(50), k.from_i64(7)];
        let found = simple_roots(&from_roots(&k, &rs)).unwrap();
        assert_eq!(found.len(), 5);
        for r in &rs {
            assert!(found.iter().any(|f| f == r), "missing {r}");
        }
    }

    #[test]
    fn close_roots_are_separated() {
        let k = PadicField::qp(3, 20).unwrap();
        let rs = [k.from_i64(1), k.from_i64(1 + 81)];
        let found = simple_roots(&from_roots(&k, &rs)).unwrap();
        assert!(found.iter().any(|f| f == &rs[0]) && found.iter().any(|f| f == &rs[1]));
    }

    #[test]
    fn repeated_root_is_a_cluster() {
        let k = PadicField::qp(5, 12).unwrap();
        let poly = from_roots(&k, &[k.from_i64(3), k.from_i64(3)]);
        let (roots, missing) = find_roots(&poly).unwrap();
        assert!(missing.is_empty());
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 2);
        assert!(simple_roots(&poly).is_err());
    }

    #[test]
    fn extensions_are_reported() {
        let k = PadicField::qp(5, 12).unwrap();
        // x^2 - 5 is ramified, x^2 - 2 is unramified over Q_5
        let ram = vec![k.from_i64(-5), k.zero(), k.one()];
        let unr = vec![k.from_i64(-2), k.zero(), k.one()];
        assert!(matches!(roots_in_field(&ram), Err(Error::NeedsExtension(_))));
        assert!(matches!(roots_in_field(&unr), Err(Error::NeedsExtension(_))));
        let e = PadicField::unramified(5, &[-2, 0, 1], 12).unwrap();
        let unr_e = vec![e.from_i64(-2), e.zero(), e.one()];
        assert_eq!(simple_roots(&unr_e).unwrap().len(), 2);
    }

    #[test]
    fn zero_root() {
        let k = PadicField::qp(7, 10).unwrap();
        let poly = vec![k.zero(), k.from_i64(-3), k.one()];
        let found = simple_roots(&poly).unwrap();
        assert!(found.iter().any(|r| r.is_zero()));
        assert!(found.iter().any(|r| r == &k.from_i64(3)));
    }
}
