//! Filtered `phi`-modules over `E`, their refinements (full `phi`-stable
//! flags) and the graded lattices attached to the weight filtration.

use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::linalg::{poly_mul, Matrix};
use crate::padic::PadicElement;
use crate::ring::RingElem;
use crate::roots::simple_roots;

/// An `E`-subspace of `E^d`, stored by a basis of column vectors.
#[derive(Clone)]
pub struct Subspace {
    dim: usize,
    basis: Vec<Vec<PadicElement>>,
}

impl Subspace {
    /// Span of the given vectors in `E^d`.
    pub fn span(d: usize, vectors: &[Vec<PadicElement>]) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != d) {
            return Err(Error::Mismatch(format!("vectors must have length {d}")));
        }
        if vectors.is_empty() {
            return Ok(Subspace { dim: d, basis: Vec::new() });
        }
        let m = Matrix::from_rows(vectors.to_vec())?;
        let (r, pivots) = m.rref()?;
        let basis = (0..pivots.len()).map(|i| r.row(i)).collect();
        Ok(Subspace { dim: d, basis })
    }

    pub fn zero(d: usize) -> Self {
        Subspace { dim: d, basis: Vec::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<PadicElement>] {
        &self.basis
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        let mut v = self.basis.clone();
        v.extend(other.basis.iter().cloned());
        Subspace::span(self.dim, &v)
    }

    pub fn contains(&self, v: &[PadicElement]) -> Result<bool> {
        if v.iter().all(|c| c.is_zero()) {
            return Ok(true);
        }
        let ext = self.sum(&Subspace::span(self.dim, &[v.to_vec()])?)?;
        Ok(ext.rank() == self.rank())
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> Result<bool> {
        Ok(other.sum(self)?.rank() == other.rank())
    }

    pub fn same_as(&self, other: &Subspace) -> Result<bool> {
        Ok(self.rank() == other.rank() && self.is_subspace_of(other)?)
    }

    /// `dim(self ∩ other)` from `dim A + dim B - dim(A + B)`.
    pub fn intersection_dim(&self, other: &Subspace) -> Result<usize> {
        Ok(self.rank() + other.rank() - self.sum(other)?.rank())
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> =
            self.basis.iter().map(|v| format!("({})", v.iter().map(|c| c.to_string()).join(", "))).collect();
        write!(f, "<{}>", rows.join(", "))
    }
}

/// `(D, Phi, Fil)` with `Fil^j = span{w_l : s_l >= j}`.
#[derive(Clone, Debug)]
pub struct FilteredPhiModule {
    phi: Matrix<PadicElement>,
    weights: Vec<i64>,
    adapted: Vec<Vec<PadicElement>>,
}

impl FilteredPhiModule {
    /// `adapted[l]` is `w_l`, paired with `weights[l]`; weights are sorted on input.
    pub fn new(phi: Matrix<PadicElement>, weights: Vec<i64>, adapted: Vec<Vec<PadicElement>>) -> Result<Self> {
        let d = phi.rows();
        if !phi.is_square() || d == 0 {
            return Err(Error::InvalidInput("Frobenius matrix must be square and nonempty".into()));
        }
        if weights.len() != d || adapted.len() != d || adapted.iter().any(|w| w.len() != d) {
            return Err(Error::Mismatch(format!("need {d} weights and {d} adapted vectors of length {d}")));
        }
        if phi.det()?.is_zero() {
            return Err(Error::NotInvertible("Frobenius matrix is singular".into()));
        }
        if Subspace::span(d, &adapted)?.rank() != d {
            return Err(Error::InvalidInput("adapted vectors do not form a basis".into()));
        }
        let mut pairs: Vec<(i64, Vec<PadicElement>)> = weights.into_iter().zip(adapted).collect();
        pairs.sort_by_key(|(s, _)| *s);
        let (weights, adapted) = pairs.into_iter().unzip();
        Ok(FilteredPhiModule { phi, weights, adapted })
    }

    /// Standard basis as adapted basis.
    pub fn with_standard_basis(phi: Matrix<PadicElement>, weights: Vec<i64>) -> Result<Self> {
        let d = phi.rows();
        let t = phi.get(0, 0).clone();
        let basis =
            (0..d).map(|l| (0..d).map(|i| if i == l { t.one_like() } else { t.zero_like() }).collect()).collect();
        Self::new(phi, weights, basis)
    }

    pub fn dim(&self) -> usize {
        self.phi.rows()
    }

    pub fn phi(&self) -> &Matrix<PadicElement> {
        &self.phi
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn adapted_basis(&self) -> &[Vec<PadicElement>] {
        &self.adapted
    }

    pub fn prime(&self) -> u64 {
        self.phi.get(0, 0).prime()
    }

    /// `Fil^j`.
    pub fn fil(&self, j: i64) -> Result<Subspace> {
        let vecs: Vec<Vec<PadicElement>> =
            self.weights.iter().zip(&self.adapted).filter(|(s, _)| **s >= j).map(|(_, w)| w.clone()).collect();
        Subspace::span(self.dim(), &vecs)
    }

    /// The same filtered module presented with another adapted basis
    /// `w'_l = sum_{m : s_m >= s_l} T_{ml} w_m`; `t` must be invertible and
    /// respect the filtration.
    pub fn rebased(&self, t: &Matrix<PadicElement>) -> Result<Self> {
        let d = self.dim();
        for l in 0..d {
            for m in 0..d {
                if self.weights[m] < self.weights[l] && !t.get(m, l).is_zero() {
                    return Err(Error::InvalidInput("change of basis does not preserve the filtration".into()));
                }
            }
        }
        let w = Matrix::from_columns(&self.adapted)?;
        let new = w.mul(t).columns();
        Self::new(self.phi.clone(), self.weights.clone(), new)
    }
}

#[derive(Clone, Debug)]
pub struct Refinement {
    /// `flag[i]` spans `F_{i+1}`.
    pub flag: Vec<Subspace>,
    pub phis: Vec<PadicElement>,
    pub weights: Vec<i64>,
    /// `delta_i(p) = phi_i p^(-s_i)`.
    pub params: Vec<PadicElement>,
}

fn stable(phi: &Matrix<PadicElement>, f: &Subspace) -> Result<bool> {
    let images: Vec<Vec<PadicElement>> = f.basis().iter().map(|v| phi.mul_vec(v)).collect();
    Ok(f.sum(&Subspace::span(f.ambient_dim(), &images)?)?.rank() == f.rank())
}

/// Matrix of `Phi` restricted to `F` in the stored basis of `F`.
fn restriction(phi: &Matrix<PadicElement>, f: &Subspace) -> Result<Matrix<PadicElement>> {
    let basis = Matrix::from_columns(f.basis())?;
    let images = Matrix::from_columns(&f.basis().iter().map(|v| phi.mul_vec(v)).collect::<Vec<_>>())?;
    let (_, pivots) = basis.transpose().rref()?;
    let rows: Vec<usize> = pivots;
    let all: Vec<usize> = (0..basis.cols()).collect();
    let sq = basis.submatrix(&rows, &all);
    let rhs = images.submatrix(&rows, &all);
    let s = sq.solve(&rhs)?;
    if !basis.mul(&s).sub(&images).is_zero() {
        return Err(Error::Precondition("subspace is not Frobenius-stable".into()));
    }
    Ok(s)
}

/// `(phi_1, .., phi_d)` with `det(T - Phi|F_i) = prod_{j<=i} (T - phi_j)`.
pub fn ordering_of_flag(d: &FilteredPhiModule, flag: &[Subspace]) -> Result<Vec<PadicElement>> {
    check_flag_shape(d, flag)?;
    let mut out = Vec::with_capacity(flag.len());
    let mut prev_poly: Vec<PadicElement> = vec![d.phi.get(0, 0).one_like()];
    let mut prev_trace = d.phi.get(0, 0).zero_like();
    for (i, f) in flag.iter().enumerate() {
        if !stable(&d.phi, f)? {
            return Err(Error::Precondition(format!("flag step {} is not Frobenius-stable", i + 1)));
        }
        let s = restriction(&d.phi, f)?;
        let tr = s.trace();
        let new = tr.sub_ref(&prev_trace);
        let expected = poly_mul(&prev_poly, &[new.neg_ref(), new.one_like()]);
        let cp = s.charpoly();
        if cp.len() != expected.len() || cp.iter().zip(&expected).any(|(a, b)| !a.sub_ref(b).is_zero()) {
            return Err(Error::Precondition(format!("characteristic polynomial of step {} does not factor", i + 1)));
        }
        out.push(new);
        prev_poly = cp;
        prev_trace = tr;
    }
    Ok(out)
}

fn check_flag_shape(d: &FilteredPhiModule, flag: &[Subspace]) -> Result<()> {
    if flag.len() != d.dim() {
        return Err(Error::InvalidInput(format!("a full flag has {} steps, got {}", d.dim(), flag.len())));
    }
    for (i, f) in flag.iter().enumerate() {
        if f.rank() != i + 1 {
            return Err(Error::InvalidInput(format!("flag step {} has dimension {}", i + 1, f.rank())));
        }
        if i > 0 && !flag[i - 1].is_subspace_of(f)? {
            return Err(Error::InvalidInput(format!("flag step {} does not contain the previous one", i + 1)));
        }
    }
    Ok(())
}

/// Jumps of the filtration induced on `f`, as a sorted multiset.
fn jumps(d: &FilteredPhiModule, f: &Subspace) -> Result<Vec<i64>> {
    let lo = *d.weights.first().unwrap();
    let hi = *d.weights.last().unwrap();
    let mut out = Vec::new();
    for j in lo..=hi {
        let here = d.fil(j)?.intersection_dim(f)?;
        let next = d.fil(j + 1)?.intersection_dim(f)?;
        out.extend(std::iter::repeat(j).take(here - next));
    }
    Ok(out)
}

/// `(s_1, .., s_d)`: `s_i` is the jump of `Fil ∩ F_i` not already a jump of `Fil ∩ F_{i-1}`.
pub fn induced_weights(d: &FilteredPhiModule, flag: &[Subspace]) -> Result<Vec<i64>> {
    check_flag_shape(d, flag)?;
    let mut prev: Vec<i64> = Vec::new();
    let mut out = Vec::with_capacity(flag.len());
    for f in flag {
        let mut cur = jumps(d, f)?;
        for s in &prev {
            let pos = cur.iter().position(|x| x == s).expect("jumps grow along a flag");
            cur.remove(pos);
        }
        out.push(cur[0]);
        prev = jumps(d, f)?;
    }
    Ok(out)
}

/// `delta_i(p) = phi_i p^(-s_i)` paired with `s_i` (the restriction to `Gamma`
/// is `chi^(-s_i)`).
pub fn parameter(phis: &[PadicElement], weights: &[i64]) -> Result<Vec<(PadicElement, i64)>> {
    phis.iter().zip(weights).map(|(f, &s)| Ok((f.mul_ref(&f.field().p_power(-s)), s))).collect()
}

/// A refinement from an explicit flag, after checking stability.
pub fn refinement_from_flag(d: &FilteredPhiModule, flag: Vec<Subspace>) -> Result<Refinement> {
    let phis = ordering_of_flag(d, &flag)?;
    let weights = induced_weights(d, &flag)?;
    let params = parameter(&phis, &weights)?.into_iter().map(|(x, _)| x).collect();
    Ok(Refinement { flag, phis, weights, params })
}

/// One refinement per ordering of the (distinct) Frobenius eigenvalues.
pub fn enumerate_refinements(d: &FilteredPhiModule) -> Result<Vec<Refinement>> {
    let n = d.dim();
    let eig = simple_roots(&d.phi.charpoly())?;
    if eig.len() != n {
        return Err(Error::NeedsExtension("Frobenius eigenvalues do not all lie in E".into()));
    }
    let mut lines = Vec::with_capacity(n);
    for l in &eig {
        let shifted = d.phi.sub(&Matrix::identity(n, l).scale(l));
        let ker = shifted.nullspace()?;
        if ker.len() != 1 {
            return Err(Error::Precondition(format!("eigenspace of {l} has dimension {}", ker.len())));
        }
        lines.push(ker.into_iter().next().unwrap());
    }
    let mut out = Vec::new();
    for perm in (0..n).permutations(n) {
        let mut flag = Vec::with_capacity(n);
        for i in 1..=n {
            let vecs: Vec<Vec<PadicElement>> = perm[..i].iter().map(|&j| lines[j].clone()).collect();
            flag.push(Subspace::span(n, &vecs)?);
        }
        out.push(refinement_from_flag(d, flag)?);
    }
    Ok(out)
}

/// `prod (T + s_i)`, lowest degree first.
pub fn sen_polynomial(weights: &[i64], template: &PadicElement) -> Vec<PadicElement> {
    weights
        .iter()
        .fold(vec![template.one_like()], |acc, &s| poly_mul(&acc, &[template.from_i64_like(s), template.one_like()]))
}

/// A graded family of subspaces indexed by the x-exponents `lo..=hi`: the
/// window of a lattice `sum_e x^e L_e` in `D ⊗ E((x))`.
#[derive(Clone, Debug)]
pub struct GradedLattice {
    pub lo: i64,
    pub hi: i64,
    pub pieces: Vec<Subspace>,
}

impl GradedLattice {
    pub fn piece(&self, e: i64) -> &Subspace {
        &self.pieces[(e - self.lo) as usize]
    }

    /// Piece `e` is all of `D` for `e >= k`, zero below.
    pub fn power_of_x(d: &FilteredPhiModule, k: i64, lo: i64, hi: i64) -> Result<Self> {
        let all = d.fil(i64::MIN / 2)?;
        let pieces = (lo..=hi).map(|e| if e >= k { all.clone() } else { Subspace::zero(d.dim()) }).collect();
        Ok(GradedLattice { lo, hi, pieces })
    }

    pub fn is_sublattice_of(&self, other: &GradedLattice) -> Result<bool> {
        for e in self.lo.max(other.lo)..=self.hi.min(other.hi) {
            if !self.piece(e).is_subspace_of(other.piece(e))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn same_as(&self, other: &GradedLattice) -> Result<bool> {
        Ok(self.is_sublattice_of(other)? && other.is_sublattice_of(self)?)
    }

    /// Basis vectors `x^e v` with `v` running over a basis of the new part
    /// of `L_e` (relative to `L_{e-1}`), for the window's first piece all of it.
    pub fn generators(&self) -> Result<Vec<(i64, Vec<PadicElement>)>> {
        let mut out = Vec::new();
        let mut prev = Subspace::zero(self.pieces[0].ambient_dim());
        for (i, p) in self.pieces.iter().enumerate() {
            let e = self.lo + i as i64;
            let mut acc = prev.clone();
            for v in p.basis() {
                if !acc.contains(v)? {
                    acc = acc.sum(&Subspace::span(acc.ambient_dim(), &[v.clone()])?)?;
                    out.push((e, v.clone()));
                }
            }
            prev = p.clone();
        }
        Ok(out)
    }

    /// `z = sum_e x^e z_e` lies in the lattice iff `z_e ∈ L_e` for each `e`.
    pub fn contains(&self, z: &[(i64, Vec<PadicElement>)]) -> Result<bool> {
        for (e, v) in z {
            if *e < self.lo || *e > self.hi {
                return Err(Error::InvalidInput(format!("exponent {e} outside the window")));
            }
            if !self.piece(*e).contains(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn check_window(d: &FilteredPhiModule, lo: i64, hi: i64) -> Result<()> {
    let smax = *d.weights.last().unwrap();
    let smin = *d.weights.first().unwrap();
    if lo > -smax || hi < -smin || lo > hi {
        return Err(Error::InvalidInput(format!(
            "window [{lo}, {hi}] must contain the exponents -s_l in [{}, {}]",
            -smax, -smin
        )));
    }
    Ok(())
}

/// `sum_l x^(-s_l) w_l E<<x>>` on the window: the piece at exponent `e` is
/// `span{w_l : -s_l <= e}`.
pub fn dtri_lattice(d: &FilteredPhiModule, lo: i64, hi: i64) -> Result<GradedLattice> {
    check_window(d, lo, hi)?;
    let pieces = (lo..=hi)
        .map(|e| {
            let vecs: Vec<Vec<PadicElement>> =
                d.weights.iter().zip(&d.adapted).filter(|(s, _)| -**s <= e).map(|(_, w)| w.clone()).collect();
            Subspace::span(d.dim(), &vecs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GradedLattice { lo, hi, pieces })
}

/// `Fil^k = sum_{i+j=k} x^i Fil^j(D) E<<x>>` on the window.
pub fn fil_k(d: &FilteredPhiModule, k: i64, lo: i64, hi: i64) -> Result<GradedLattice> {
    check_window(d, lo, hi)?;
    let smax = *d.weights.last().unwrap();
    let pieces = (lo..=hi)
        .map(|e| {
            // terms x^i Fil^j with i <= e, j = k - i; Fil^j vanishes for j > s_max
            let mut acc = Subspace::zero(d.dim());
            for j in (k - e)..=(k - e).max(smax) {
                acc = acc.sum(&d.fil(j)?)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GradedLattice { lo, hi, pieces })
}
