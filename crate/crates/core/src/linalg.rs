//! Dense matrices over any [`RingElem`], with p-adically pivoted elimination.

use std::fmt;

use crate::error::{Error, Result};
use crate::padic::PadicElement;
use crate::ring::RingElem;
use crate::valuation::Valuation;

#[derive(Clone)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: RingElem> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "matrix data has {} entries, expected {}",
                data.len(),
                rows * cols
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged matrix rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize, template: &T) -> Self {
        let z = template.zero_like();
        Matrix { rows, cols, data: vec![z; rows * cols] }
    }

    pub fn identity(n: usize, template: &T) -> Self {
        let z = template.zero_like();
        let o = template.one_like();
        Self::from_fn(n, n, |i, j| if i == j { o.clone() } else { z.clone() })
    }

    pub fn diagonal(entries: &[T]) -> Self {
        let n = entries.len();
        let z = entries[0].zero_like();
        Self::from_fn(n, n, |i, j| if i == j { entries[i].clone() } else { z.clone() })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<T>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, |v| v.len());
        if cols.iter().any(|v| v.len() != r) {
            return Err(Error::InvalidInput("columns of unequal length".into()));
        }
        Ok(Self::from_fn(r, c, |i, j| cols[j][i].clone()))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<T>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn map<U: RingElem>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn try_map<U: RingElem>(&self, f: impl Fn(&T) -> Result<U>) -> Result<Matrix<U>> {
        let data = self.data.iter().map(f).collect::<Result<Vec<U>>>()?;
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Submatrix with the given row and column index lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]).clone())
    }

    fn check_shape(&self, other: &Self) {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "matrix shapes differ: {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_shape(other);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.add_ref(b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_shape(other);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.sub_ref(b)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.neg_ref())
    }

    pub fn scale_by(&self, c: &T) -> Self {
        self.map(|a| a.mul_ref(c))
    }

    pub fn scale(&self, c: &PadicElement) -> Self {
        self.map(|a| a.scale(c))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let template = self.data.first().or(other.data.first()).expect("empty matrix product");
        let mut out = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let acc = (0..self.cols)
                    .map(|k| self.get(i, k).mul_ref(other.get(k, j)))
                    .reduce(|a, b| a.add_ref(&b))
                    .unwrap_or_else(|| template.zero_like());
                out.push(acc);
            }
        }
        Matrix { rows: self.rows, cols: other.cols, data: out }
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|k| self.get(i, k).mul_ref(&v[k]))
                    .reduce(|a, b| a.add_ref(&b))
                    .unwrap_or_else(|| v[0].zero_like())
            })
            .collect()
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::identity(self.rows, &self.data[0]);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| a.is_zero())
    }

    pub fn eq_at_precision(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.sub(other).is_zero()
    }

    /// Minimum valuation over the entries.
    pub fn valuation(&self) -> Valuation {
        self.data.iter().map(|a| a.valuation()).min().unwrap_or(Valuation::Infinite)
    }

    /// Minimum absolute precision over the entries.
    pub fn precision(&self) -> i64 {
        self.data.iter().map(|a| a.precision()).min().unwrap_or(i64::MAX)
    }

    pub fn trace(&self) -> T {
        (0..self.rows).map(|i| self.get(i, i).clone()).reduce(|a, b| a.add_ref(&b)).expect("trace of empty matrix")
    }

    /// Reduced row echelon form; pivots chosen with minimal valuation.
    /// Returns the reduced matrix and the pivot columns.
    pub fn rref(&self) -> Result<(Self, Vec<usize>)> {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let best = (r..m.rows).filter(|&i| !m.get(i, c).is_zero()).min_by_key(|&i| m.get(i, c).valuation());
            let Some(pi) = best else { continue };
            if pi != r {
                for j in 0..m.cols {
                    m.data.swap(pi * m.cols + j, r * m.cols + j);
                }
            }
            let piv = m.get(r, c).clone();
            for j in 0..m.cols {
                let v = m.get(r, j).try_div(&piv)?;
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r {
                    continue;
                }
                let factor = m.get(i, c).clone();
                if factor.is_zero() {
                    continue;
                }
                for j in 0..m.cols {
                    let v = m.get(i, j).sub_ref(&factor.mul_ref(m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        Ok((m, pivots))
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(self.rref()?.1.len())
    }

    /// Basis of the right kernel `{v : M v = 0}` at working precision.
    pub fn nullspace(&self) -> Result<Vec<Vec<T>>> {
        let template = self.data.first().ok_or_else(|| Error::InvalidInput("empty matrix".into()))?;
        let (r, pivots) = self.rref()?;
        let mut out = Vec::new();
        for free in 0..self.cols {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = vec![template.zero_like(); self.cols];
            v[free] = template.one_like();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = r.get(row, free).neg_ref();
            }
            out.push(v);
        }
        Ok(out)
    }

    /// Solve `M X = B` for square invertible `M`.
    pub fn solve(&self, b: &Self) -> Result<Self> {
        if !self.is_square() || b.rows != self.rows {
            return Err(Error::InvalidInput("solve needs a square system".into()));
        }
        let n = self.rows;
        let aug =
            Self::from_fn(n, n + b.cols, |i, j| if j < n { self.get(i, j).clone() } else { b.get(i, j - n).clone() });
        let (r, pivots) = aug.rref()?;
        if pivots.len() < n || pivots[n - 1] >= n {
            return Err(Error::NotInvertible("matrix is singular at working precision".into()));
        }
        Ok(Self::from_fn(n, b.cols, |i, j| r.get(i, n + j).clone()))
    }

    pub fn inverse(&self) -> Result<Self> {
        let id = Self::identity(self.rows, &self.data[0]);
        self.solve(&id)
    }

    /// Determinant by pivoted elimination.
    pub fn det(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::InvalidInput("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut det = self.data[0].one_like();
        for c in 0..n {
            let best = (c..n).filter(|&i| !m.get(i, c).is_zero()).min_by_key(|&i| m.get(i, c).valuation());
            let Some(pi) = best else {
                let z = (c..n).map(|i| m.get(i, c).clone()).fold(det.zero_like(), |a, b| a.add_ref(&b));
                return Ok(det.mul_ref(&z));
            };
            if pi != c {
                for j in 0..n {
                    m.data.swap(pi * n + j, c * n + j);
                }
                det = det.neg_ref();
            }
            let piv = m.get(c, c).clone();
            det = det.mul_ref(&piv);
            for i in c + 1..n {
                let factor = m.get(i, c).try_div(&piv)?;
                for j in c..n {
                    let v = m.get(i, j).sub_ref(&factor.mul_ref(m.get(c, j)));
                    m.set(i, j, v);
                }
            }
        }
        Ok(det)
    }

    /// Characteristic polynomial `det(T I - M)` (lowest degree first, monic),
    /// by the division-free Berkowitz recursion.
    pub fn charpoly(&self) -> Vec<T> {
        assert!(self.is_square(), "characteristic polynomial of a non-square matrix");
        let n = self.rows;
        let t = &self.data[0];
        let one = t.one_like();
        let mut v = vec![one.clone(), self.get(0, 0).neg_ref()];
        for r in 1..n {
            let lead: Vec<usize> = (0..r).collect();
            let ar = self.submatrix(&lead, &lead);
            let row = self.submatrix(&[r], &lead);
            let col = self.submatrix(&lead, &[r]);
            let mut q = vec![one.clone(), self.get(r, r).neg_ref()];
            let mut cur = col.clone();
            for _ in 0..r {
                q.push(row.mul(&cur).get(0, 0).neg_ref());
                cur = ar.mul(&cur);
            }
            let mut next = Vec::with_capacity(r + 2);
            for i in 0..r + 2 {
                let mut acc = t.zero_like();
                for (j, vj) in v.iter().enumerate() {
                    if i >= j {
                        acc = acc.add_ref(&q[i - j].mul_ref(vj));
                    }
                }
                next.push(acc);
            }
            v = next;
        }
        v.reverse();
        v
    }

    /// `sum_{k <= kmax} M^k / k!`.
    pub fn exp_series(&self, kmax: usize) -> Result<Self> {
        let t = &self.data[0];
        let exact = self.precision().saturating_add(64);
        let mut term = Self::identity(self.rows, t).map(|e| e.lifted(exact));
        let mut sum = term.clone();
        for k in 1..=kmax {
            term = term.mul(self).try_map(|a| a.div_int(k as i64))?;
            sum = sum.add(&term);
        }
        Ok(sum)
    }

    /// `sum_{k=1}^{kmax} (-1)^(k+1) X^k / k` for `X = self`.
    pub fn log1p_series(&self, kmax: usize) -> Result<Self> {
        let t = &self.data[0];
        let mut power = self.clone();
        let mut sum = Self::zeros(self.rows, self.cols, t);
        for k in 1..=kmax {
            let term = power.try_map(|a| a.div_int(k as i64))?;
            sum = if k % 2 == 1 { sum.add(&term) } else { sum.sub(&term) };
            power = power.mul(self);
        }
        Ok(sum)
    }
}

impl<T: RingElem + fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| format!("{}", self.get(i, j))).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl<T: RingElem> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Matrix").field("rows", &self.rows).field("cols", &self.cols).field("data", &self.data).finish()
    }
}

/// Evaluate a polynomial (lowest degree first) at `x` by Horner's rule.
pub fn poly_eval<T: RingElem>(coeffs: &[T], x: &T) -> T {
    let mut acc = x.zero_like();
    for c in coeffs.iter().rev() {
        acc = acc.mul_ref(x).add_ref(c);
    }
    acc
}

/// Product of two polynomials (lowest degree first).
pub fn poly_mul<T: RingElem>(a: &[T], b: &[T]) -> Vec<T> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let z = a[0].zero_like();
    let mut out = vec![z; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add_ref(&x.mul_ref(y));
        }
    }
    out
}
