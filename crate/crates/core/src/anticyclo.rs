//! Two-variable series truncated by total degree, and the kernel of the
//! operator `∇_1 + ∇_2` with `∇_i = T_i d/dT_i`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::Result;
use crate::linalg::Matrix;
use crate::padic::{PadicElement, PadicField};
use crate::ring::RingElem;

/// `sum a_ij T_1^i T_2^j` over `i + j <= N`; absent entries are zero.
#[derive(Clone)]
pub struct BiSeries<R> {
    trunc: usize,
    template: R,
    terms: BTreeMap<(usize, usize), R>,
}

impl<R: RingElem> BiSeries<R> {
    pub fn zero(trunc: usize, template: &R) -> Self {
        BiSeries { trunc, template: template.zero_like(), terms: BTreeMap::new() }
    }

    pub fn monomial(i: usize, j: usize, c: R, trunc: usize) -> Self {
        let mut s = Self::zero(trunc, &c);
        s.set(i, j, c);
        s
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn set(&mut self, i: usize, j: usize, c: R) {
        if i + j <= self.trunc && !c.is_zero() {
            self.terms.insert((i, j), c);
        } else {
            self.terms.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: usize, j: usize) -> R {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(|| self.template.zero_like())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &R)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let mut out = Self::zero(trunc, &self.template);
        for (&(i, j), c) in self.terms.iter().chain(other.terms.iter()) {
            let cur = out.coeff(i, j);
            out.set(i, j, cur.add_ref(c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        let mut out = Self::zero(trunc, &self.template);
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &other.terms {
                if i + j + k + l <= trunc {
                    let cur = out.coeff(i + k, j + l);
                    out.set(i + k, j + l, cur.add_ref(&a.mul_ref(b)));
                }
            }
        }
        out
    }

    /// `(∇_1 + ∇_2)(sum a_ij T_1^i T_2^j) = sum (i + j) a_ij T_1^i T_2^j`.
    pub fn nabla_sum(&self) -> Self {
        let mut out = Self::zero(self.trunc, &self.template);
        for (&(i, j), c) in &self.terms {
            out.set(i, j, c.mul_ref(&c.from_i64_like((i + j) as i64)));
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }
}

impl<R: RingElem + fmt::Display> fmt::Display for BiSeries<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(i, j), c)| match (i, j) {
                (0, 0) => format!("{c}"),
                _ => format!("({c})*T1^{i}*T2^{j}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Monomials of total degree at most `n`, in graded lexicographic order.
pub fn monomials(n: usize) -> Vec<(usize, usize)> {
    (0..=n).flat_map(|d| (0..=d).map(move |i| (d - i, i))).collect()
}

/// Basis of `ker(∇_1 + ∇_2)` on series of total degree at most `n`.
pub fn anticyclo_kernel(field: &PadicField, n: usize) -> Result<Vec<BiSeries<PadicElement>>> {
    let basis = monomials(n);
    let one = field.one();
    let image: Vec<BiSeries<PadicElement>> =
        basis.iter().map(|&(i, j)| BiSeries::monomial(i, j, one.clone(), n).nabla_sum()).collect();
    let op = Matrix::from_fn(basis.len(), basis.len(), |r, c| {
        let (i, j) = basis[r];
        image[c].coeff(i, j)
    });
    let kernel = op.nullspace()?;
    Ok(kernel
        .into_iter()
        .map(|v| {
            let mut s = BiSeries::zero(n, &one);
            for (idx, c) in v.into_iter().enumerate() {
                let (i, j) = basis[idx];
                s.set(i, j, c);
            }
            s
        })
        .collect())
}
