//! `(phi, nabla_u)`-modules over the truncated ring `E<<x>>` with
//! `phi(x) = pi x` and `nabla_u = x d/dx`.
//!
//! Matrices act on column coordinates: if `e` is the basis, `phi(e_j) =
//! sum_i P_ij e_i` and `nabla(e_j) = sum_i N_ij e_i`. Compatibility of the
//! two operators reads `N P + x P' = P phi(N)`.

use std::fmt;

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::newton::is_global_unit;
use crate::padic::{vp_factorial, PadicElement};
use crate::ring::RingElem;
use crate::roots::roots_in_field;
use crate::series::TruncSeries;
use crate::valuation::Valuation;

pub type TruncEx = TruncSeries<PadicElement>;

/// `sum a_k pi^k x^k`.
pub fn phi_twist(f: &TruncEx, pi: &PadicElement) -> TruncEx {
    let pows = pi_powers(pi, f.trunc());
    f.map_indexed(|k, a| a.mul_ref(&pows[k]))
}

/// `x d/dx`.
pub fn x_ddx(f: &TruncEx) -> TruncEx {
    f.euler()
}

/// `f(c x)`.
pub fn sigma(f: &TruncEx, c: &PadicElement) -> TruncEx {
    phi_twist(f, c)
}

/// A matrix with entries in `E[[x]] / x^(N+1)`, stored degree by degree.
#[derive(Clone)]
pub struct MatSeries {
    coeffs: Vec<Matrix<PadicElement>>,
}

impl MatSeries {
    pub fn new(coeffs: Vec<Matrix<PadicElement>>) -> Result<Self> {
        let first = coeffs.first().ok_or_else(|| Error::InvalidInput("empty matrix series".into()))?;
        let (r, c) = (first.rows(), first.cols());
        if coeffs.iter().any(|m| m.rows() != r || m.cols() != c) {
            return Err(Error::Mismatch("matrix series coefficients of different shapes".into()));
        }
        Ok(MatSeries { coeffs })
    }

    pub fn zero(rows: usize, cols: usize, n: usize, template: &PadicElement) -> Self {
        MatSeries { coeffs: vec![Matrix::zeros(rows, cols, template); n + 1] }
    }

    pub fn constant(m: &Matrix<PadicElement>, n: usize) -> Self {
        let z = Matrix::zeros(m.rows(), m.cols(), m.get(0, 0));
        let mut coeffs = vec![m.clone()];
        coeffs.extend(std::iter::repeat(z).take(n));
        MatSeries { coeffs }
    }

    pub fn identity(d: usize, n: usize, template: &PadicElement) -> Self {
        Self::constant(&Matrix::identity(d, template), n)
    }

    /// `x^k m`.
    pub fn monomial(k: usize, m: &Matrix<PadicElement>, n: usize) -> Self {
        let mut s = Self::zero(m.rows(), m.cols(), n, m.get(0, 0));
        if k <= n {
            s.coeffs[k] = m.clone();
        }
        s
    }

    pub fn from_matrix(m: &Matrix<TruncEx>) -> Result<Self> {
        let n =
            m.entries().iter().map(|e| e.trunc()).min().ok_or_else(|| Error::InvalidInput("empty matrix".into()))?;
        let coeffs = (0..=n).map(|k| m.map(|e| e.coeff(k).clone())).collect();
        Self::new(coeffs)
    }

    pub fn to_matrix(&self) -> Matrix<TruncEx> {
        let n = self.trunc();
        let t = self.template();
        Matrix::from_fn(self.rows(), self.cols(), |i, j| {
            TruncSeries::new(self.coeffs.iter().map(|m| m.get(i, j).clone()).collect(), n, &t)
        })
    }

    pub fn rows(&self) -> usize {
        self.coeffs[0].rows()
    }

    pub fn cols(&self) -> usize {
        self.coeffs[0].cols()
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &Matrix<PadicElement> {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[Matrix<PadicElement>] {
        &self.coeffs
    }

    fn template(&self) -> PadicElement {
        self.coeffs[0].get(0, 0).zero_like()
    }

    pub fn entry(&self, i: usize, j: usize) -> TruncEx {
        TruncSeries::new(self.coeffs.iter().map(|m| m.get(i, j).clone()).collect(), self.trunc(), &self.template())
    }

    pub fn with_trunc(&self, n: usize) -> Self {
        let mut coeffs: Vec<_> = self.coeffs.iter().take(n + 1).cloned().collect();
        while coeffs.len() < n + 1 {
            coeffs.push(Matrix::zeros(self.rows(), self.cols(), &self.template()));
        }
        MatSeries { coeffs }
    }

    fn zip(
        &self,
        other: &Self,
        f: impl Fn(&Matrix<PadicElement>, &Matrix<PadicElement>) -> Matrix<PadicElement>,
    ) -> Self {
        let n = self.trunc().min(other.trunc());
        MatSeries { coeffs: (0..=n).map(|k| f(&self.coeffs[k], &other.coeffs[k])).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn neg(&self) -> Self {
        MatSeries { coeffs: self.coeffs.iter().map(|m| m.neg()).collect() }
    }

    pub fn scale(&self, c: &PadicElement) -> Self {
        MatSeries { coeffs: self.coeffs.iter().map(|m| m.scale(c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.trunc().min(other.trunc());
        let coeffs = (0..=n)
            .map(|k| (0..=k).map(|i| self.coeffs[i].mul(&other.coeffs[k - i])).reduce(|a, b| a.add(&b)).unwrap())
            .collect();
        MatSeries { coeffs }
    }

    /// Coefficient `k` multiplied by `c^k`: the matrix of `f(x) -> f(cx)`
    /// applied entrywise; with `c = pi` this is `phi`.
    pub fn twist(&self, c: &PadicElement) -> Self {
        let mut ck = c.one_like().lifted(c.precision() + 64);
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (k, m) in self.coeffs.iter().enumerate() {
            if k > 0 {
                ck = ck.mul_ref(c);
            }
            coeffs.push(m.scale(&ck));
        }
        MatSeries { coeffs }
    }

    /// `x d/dx` entrywise.
    pub fn euler(&self) -> Self {
        MatSeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, m)| m.scale(&m.get(0, 0).from_i64_like(k as i64).lifted(m.precision() + 64)))
                .collect(),
        }
    }

    /// Inverse, for an invertible constant term.
    pub fn inverse(&self) -> Result<Self> {
        let c0 = self.coeffs[0].inverse()?;
        let mut out: Vec<Matrix<PadicElement>> = vec![c0.clone()];
        for k in 1..self.coeffs.len() {
            let s = (1..=k).map(|i| self.coeffs[i].mul(&out[k - i])).reduce(|a, b| a.add(&b)).unwrap();
            out.push(c0.mul(&s).neg());
        }
        Ok(MatSeries { coeffs: out })
    }

    pub fn select_cols(&self, cols: &[usize]) -> Self {
        let rows: Vec<usize> = (0..self.rows()).collect();
        MatSeries { coeffs: self.coeffs.iter().map(|m| m.submatrix(&rows, cols)).collect() }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let cols: Vec<usize> = (0..self.cols()).collect();
        MatSeries { coeffs: self.coeffs.iter().map(|m| m.submatrix(rows, &cols)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|m| m.is_zero())
    }

    pub fn eq_at_precision(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    pub fn precision(&self) -> i64 {
        self.coeffs.iter().map(|m| m.precision()).min().unwrap()
    }

    pub fn valuation(&self) -> Valuation {
        self.coeffs.iter().map(|m| m.valuation()).min().unwrap()
    }

    pub fn map(&self, f: impl Fn(&PadicElement) -> PadicElement) -> Self {
        MatSeries { coeffs: self.coeffs.iter().map(|m| m.map(&f)).collect() }
    }

    /// Smallest `k` with a nonzero coefficient matrix.
    pub fn x_order(&self) -> Option<usize> {
        self.coeffs.iter().position(|m| !m.is_zero())
    }
}

impl fmt::Display for MatSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows())
            .map(|i| {
                let cells: Vec<String> = (0..self.cols()).map(|j| format!("{}", self.entry(i, j))).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

impl fmt::Debug for MatSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Finite free module over truncated `E<<x>>` with semilinear `phi` and
/// optionally `nabla_u`.
#[derive(Clone, Debug)]
pub struct PhiModuleX {
    pi: PadicElement,
    phi: MatSeries,
    nabla: Option<MatSeries>,
}

impl PhiModuleX {
    pub fn new(pi: PadicElement, phi: MatSeries, nabla: Option<MatSeries>) -> Result<Self> {
        if phi.rows() != phi.cols() {
            return Err(Error::InvalidInput("matrix of phi must be square".into()));
        }
        if pi.is_zero() || !pi.valuation().is_positive_finite() {
            return Err(Error::InvalidInput(format!("pi = {pi} must have positive valuation")));
        }
        if phi.coeff(0).det()?.is_zero() {
            return Err(Error::NotInvertible("constant term of the matrix of phi is singular".into()));
        }
        let phi = match &nabla {
            Some(n) => {
                if n.rows() != phi.rows() || n.cols() != phi.cols() {
                    return Err(Error::Mismatch("matrices of phi and nabla have different sizes".into()));
                }
                phi.with_trunc(phi.trunc().min(n.trunc()))
            }
            None => phi,
        };
        let nabla = nabla.map(|n| n.with_trunc(phi.trunc()));
        let m = PhiModuleX { pi, phi, nabla };
        if let Some(res) = m.commutation_residual() {
            if !res.is_zero() {
                return Err(Error::Precondition(format!("phi and nabla do not commute: residual {res}")));
            }
        }
        Ok(m)
    }

    pub fn rank(&self) -> usize {
        self.phi.rows()
    }

    pub fn trunc(&self) -> usize {
        self.phi.trunc()
    }

    pub fn pi(&self) -> &PadicElement {
        &self.pi
    }

    pub fn phi_matrix(&self) -> &MatSeries {
        &self.phi
    }

    pub fn nabla_matrix(&self) -> Option<&MatSeries> {
        self.nabla.as_ref()
    }

    /// `N P + x P' - P phi(N)`.
    pub fn commutation_residual(&self) -> Option<MatSeries> {
        let n = self.nabla.as_ref()?;
        let p = &self.phi;
        Some(n.mul(p).add(&p.euler()).sub(&p.mul(&n.twist(&self.pi))))
    }

    /// Matrix of `phi` applied to the vectors given as columns of `v`.
    pub fn apply_phi(&self, v: &MatSeries) -> MatSeries {
        self.phi.mul(&v.twist(&self.pi))
    }

    pub fn apply_nabla(&self, v: &MatSeries) -> Option<MatSeries> {
        Some(self.nabla.as_ref()?.mul(v).add(&v.euler()))
    }

    /// Matrices in the basis given by the columns of `b`.
    pub fn change_basis(&self, b: &MatSeries) -> Result<PhiModuleX> {
        let binv = b.inverse()?;
        let phi = binv.mul(&self.apply_phi(b));
        let nabla = self.apply_nabla(b).map(|nb| binv.mul(&nb));
        Ok(PhiModuleX { pi: self.pi.clone(), phi, nabla })
    }
}

trait ValuationExt {
    fn is_positive_finite(&self) -> bool;
}

impl ValuationExt for Valuation {
    fn is_positive_finite(&self) -> bool {
        matches!(self, Valuation::Finite(v) if *v > Rational64::from_integer(0))
    }
}

/// `pi^i` for `i = 0..=n`, known exactly relative to `pi`.
fn pi_powers(pi: &PadicElement, n: usize) -> Vec<PadicElement> {
    let mut out = vec![pi.one_like().lifted(pi.precision() + 64)];
    for i in 1..=n {
        let next = out[i - 1].mul_ref(pi);
        out.push(next);
    }
    out
}

/// Kernel of `phi - alpha` on truncated `E<<x>>`: `{x^i}` when `alpha = pi^i`.
pub fn kernel_phi_minus_alpha(alpha: &PadicElement, pi: &PadicElement, n: usize) -> Result<Vec<TruncEx>> {
    if alpha.is_zero() {
        return Err(Error::InvalidInput("alpha must be nonzero".into()));
    }
    if alpha.relative_precision() < 1 {
        return Err(Error::PrecisionExhausted(format!("alpha = {alpha} is known to too few digits")));
    }
    let one = alpha.one_like();
    Ok(pi_powers(pi, n)
        .iter()
        .enumerate()
        .filter(|(_, pk)| pk.sub_ref(alpha).is_zero())
        .map(|(i, _)| TruncSeries::monomial(i, one.clone(), n))
        .collect())
}

/// Solve `phi(f) - alpha f = g` coefficientwise; on the kernel direction
/// the component of `f` is set to zero.
pub fn solve_phi_minus_alpha(alpha: &PadicElement, pi: &PadicElement, g: &TruncEx) -> Result<TruncEx> {
    let n = g.trunc();
    let pows = pi_powers(pi, n);
    let mut out = Vec::with_capacity(n + 1);
    for (k, gk) in g.coeffs().iter().enumerate() {
        let d = pows[k].sub_ref(alpha);
        if d.is_zero() {
            if !gk.is_zero() {
                return Err(Error::Resonance { index: k, residual: gk.to_string() });
            }
            out.push(gk.zero_like().with_precision(gk.precision()));
        } else {
            out.push(gk.checked_div(&d)?);
        }
    }
    Ok(TruncSeries::new(out, n, &alpha.zero_like()))
}

/// A retained entry of the nilpotent part.
#[derive(Clone, Debug)]
pub struct Resonance {
    pub degree: usize,
    pub row: usize,
    pub col: usize,
    pub value: PadicElement,
}

#[derive(Clone, Debug)]
pub struct NormalForm {
    /// Base change: the new basis vectors are the columns of `b`.
    pub b: MatSeries,
    pub eigenvalues: Vec<PadicElement>,
    /// `diag(eigenvalues)`.
    pub a: Matrix<PadicElement>,
    /// `(i, N_i)` for `i = 1..=N`.
    pub nilpotent: Vec<(usize, Matrix<PadicElement>)>,
    pub resonances: Vec<Resonance>,
    /// Matrix of `nabla` in the new basis, if present.
    pub nabla: Option<MatSeries>,
    /// `B^-1 P phi(B) - (A + sum x^i N_i)`.
    pub residual: MatSeries,
}

impl NormalForm {
    /// `A + sum x^i N_i`.
    pub fn matrix(&self) -> MatSeries {
        let n = self.b.trunc();
        let mut m = MatSeries::constant(&self.a, n);
        for (i, ni) in &self.nilpotent {
            m = m.add(&MatSeries::monomial(*i, ni, n));
        }
        m
    }
}

/// Eigenvalues of the constant term with a basis of eigenvectors.
fn eigenbasis(p0: &Matrix<PadicElement>) -> Result<(Vec<PadicElement>, Matrix<PadicElement>)> {
    let d = p0.rows();
    let roots = roots_in_field(&p0.charpoly())?;
    let mut values = Vec::new();
    let mut cols = Vec::new();
    for r in roots {
        let shifted = p0.sub(&Matrix::identity(d, &r.value).scale(&r.value));
        let kernel = shifted.nullspace()?;
        if kernel.len() != r.multiplicity {
            return Err(Error::Precondition(format!(
                "constant term is not semisimple: eigenvalue {} has multiplicity {} but {} eigenvector(s)",
                r.value,
                r.multiplicity,
                kernel.len()
            )));
        }
        for v in kernel {
            values.push(r.value.clone());
            cols.push(v);
        }
    }
    if cols.len() != d {
        return Err(Error::Precondition("eigenvectors do not span".into()));
    }
    Ok((values, Matrix::from_columns(&cols)?))
}

/// Degree-by-degree reduction of the matrix of `phi` to `A + sum x^i N_i`.
///
/// `threshold` bounds the valuation of `pi^k l_r - l_c` below which a
/// nonzero difference is trusted; it defaults to half the working precision.
pub fn normal_form(m: &PhiModuleX, threshold: Option<i64>) -> Result<NormalForm> {
    let d = m.rank();
    let n = m.trunc();
    let pi = m.pi();
    let prec = m.phi.precision();
    let threshold = threshold.unwrap_or(prec / 2);
    let (values, q0) = eigenbasis(m.phi.coeff(0))?;
    let tmpl = pi.zero_like();
    let mut b = MatSeries::constant(&q0, n);
    let mut cur = m.change_basis(&b)?.phi;
    let pows = pi_powers(pi, n);
    let mut resonances = Vec::new();
    let mut nilpotent = Vec::new();
    for k in 1..=n {
        let c = cur.coeff(k).clone();
        let mut x = Matrix::zeros(d, d, &tmpl);
        let mut nk = Matrix::zeros(d, d, &tmpl);
        for r in 0..d {
            for col in 0..d {
                let delta = pows[k].mul_ref(&values[r]).sub_ref(&values[col]);
                let entry = c.get(r, col);
                if delta.is_zero() {
                    if !entry.is_zero() {
                        resonances.push(Resonance { degree: k, row: r, col, value: entry.clone() });
                        nk.set(r, col, entry.clone());
                    }
                    continue;
                }
                if delta.val().is_some_and(|v| v >= threshold) {
                    return Err(Error::NearResonance {
                        index: k,
                        detail: format!("pi^{k} * {} - {} has valuation {}", values[r], values[col], delta.valuation()),
                    });
                }
                x.set(r, col, entry.checked_div(&delta)?.neg_ref());
            }
        }
        nilpotent.push((k, nk));
        if x.is_zero() {
            continue;
        }
        let step = MatSeries::identity(d, n, &tmpl).add(&MatSeries::monomial(k, &x, n));
        cur = step.inverse()?.mul(&cur.mul(&step.twist(pi)));
        b = b.mul(&step);
    }
    let a = Matrix::diagonal(&values);
    let mut nf = NormalForm {
        b: b.clone(),
        eigenvalues: values,
        a,
        nilpotent,
        resonances,
        nabla: None,
        residual: MatSeries::zero(d, d, n, &tmpl),
    };
    let conj = m.change_basis(&b)?;
    nf.residual = conj.phi.sub(&nf.matrix());
    nf.nabla = conj.nabla;
    if !nf.residual.is_zero() {
        return Err(Error::PrecisionExhausted(format!(
            "normal form residual is nonzero at precision: {}",
            nf.residual
        )));
    }
    Ok(nf)
}

#[derive(Clone, Debug)]
pub struct Saturation {
    pub k: usize,
    /// `v / x^k`, truncated at `N - k`.
    pub vector: Vec<TruncEx>,
    pub eigenvalue: PadicElement,
    /// Indices `i` such that `vector, e_i` form a basis of the truncated module.
    pub complement: Vec<usize>,
}

/// Divide an eigenvector `phi(v) = alpha v` by its x-adic content.
pub fn saturate_eigenvector(m: &PhiModuleX, v: &[TruncEx], alpha: &PadicElement) -> Result<Saturation> {
    let d = m.rank();
    if v.len() != d {
        return Err(Error::Mismatch(format!("vector of length {} for a module of rank {d}", v.len())));
    }
    let n = v.iter().map(|c| c.trunc()).min().unwrap().min(m.trunc());
    let col = column(&v.iter().map(|c| c.with_trunc(n)).collect::<Vec<_>>())?;
    let res = m.apply_phi(&col).sub(&col.scale(alpha));
    if !res.is_zero() {
        return Err(Error::Precondition(format!("not an eigenvector for {alpha}: residual {res}")));
    }
    let k = col.x_order().ok_or_else(|| Error::InvalidInput("zero vector".into()))?;
    let tmpl = alpha.zero_like();
    let vector: Vec<TruncEx> = v.iter().map(|c| TruncSeries::new(c.coeffs()[k..=n].to_vec(), n - k, &tmpl)).collect();
    let eigenvalue = alpha.checked_div(&m.pi().pow(k as u64))?;
    let pivot = (0..d)
        .filter(|&i| !vector[i].coeff(0).is_zero())
        .min_by_key(|&i| vector[i].coeff(0).valuation())
        .expect("saturated vector has a nonzero constant term");
    let complement = (0..d).filter(|&i| i != pivot).collect();
    Ok(Saturation { k, vector, eigenvalue, complement })
}

fn column(v: &[TruncEx]) -> Result<MatSeries> {
    MatSeries::from_matrix(&Matrix::from_columns(&[v.to_vec()])?)
}

/// Residual checks for a submodule spanned by the columns of `v`.
#[derive(Clone, Debug)]
pub struct SubmoduleCheck {
    pub rank: usize,
    pub phi_stable: bool,
    pub nabla_stable: Option<bool>,
    /// The constant term has full column rank (no common x factor).
    pub saturated: bool,
}

/// Verify stability of `span(v)` by solving `phi(V) = V S` on a set of rows
/// where `V(0)` is invertible and checking the remaining residual.
pub fn check_submodule(m: &PhiModuleX, v: &MatSeries) -> Result<SubmoduleCheck> {
    let j = v.cols();
    let (_, pivots) = v.coeff(0).transpose().rref()?;
    let saturated = pivots.len() == j;
    if !saturated {
        return Ok(SubmoduleCheck { rank: pivots.len(), phi_stable: false, nabla_stable: None, saturated });
    }
    let vi = v.select_rows(&pivots).inverse()?;
    let stable = |w: &MatSeries| -> bool {
        let s = vi.mul(&w.select_rows(&pivots));
        w.sub(&v.mul(&s)).is_zero()
    };
    let phi_stable = stable(&m.apply_phi(v));
    let nabla_stable = m.apply_nabla(v).map(|w| stable(&w));
    Ok(SubmoduleCheck { rank: j, phi_stable, nabla_stable, saturated })
}

#[derive(Clone, Debug)]
pub struct Flag {
    /// `steps[j]` spans `M_{j+1}` (columns).
    pub steps: Vec<MatSeries>,
    /// Eigenvalue of `phi` on `M_{j+1} / M_j`.
    pub eigenvalues: Vec<PadicElement>,
}

/// A full flag of saturated `phi`- and `nabla`-stable submodules, built from
/// the normal form by taking eigenvalues in order of increasing valuation.
pub fn full_flag(m: &PhiModuleX) -> Result<Flag> {
    let nf = normal_form(m, None)?;
    let d = m.rank();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by_key(|&i| nf.eigenvalues[i].valuation());
    let mut steps = Vec::with_capacity(d);
    for j in 1..=d {
        let v = nf.b.select_cols(&order[..j]);
        let check = check_submodule(m, &v)?;
        if !check.saturated || !check.phi_stable || check.nabla_stable == Some(false) {
            return Err(Error::Precondition(format!("flag step {j} is not stable: {check:?}")));
        }
        steps.push(v);
    }
    let eigenvalues = order.iter().map(|&i| nf.eigenvalues[i].clone()).collect();
    Ok(Flag { steps, eigenvalues })
}

/// `k` with `(f) = (x^k)`, after checking the cofactor is a constant.
pub fn classify_stable_ideal(f: &TruncEx) -> Result<usize> {
    let k = f.order().ok_or_else(|| Error::InvalidInput("zero series generates the zero ideal".into()))?;
    let n = f.trunc();
    let cofactor = TruncSeries::new(f.coeffs()[k..].to_vec(), n - k, f.template());
    if !is_global_unit(&cofactor) {
        return Err(Error::Precondition(format!("cofactor {cofactor} of x^{k} is not a constant")));
    }
    Ok(k)
}

/// `(delta(pi), w)` for a rank-one module with constant matrices.
pub fn rank1_character(m: &PhiModuleX) -> Result<(PadicElement, PadicElement)> {
    if m.rank() != 1 {
        return Err(Error::InvalidInput("rank-one module expected".into()));
    }
    let p = m.phi.entry(0, 0);
    if !is_global_unit(&p) {
        return Err(Error::Precondition(format!("matrix of phi {p} is not a nonzero constant")));
    }
    let n = m.nabla.as_ref().ok_or_else(|| Error::InvalidInput("matrix of nabla is required".into()))?.entry(0, 0);
    if n.coeffs()[1..].iter().any(|c| !c.is_zero()) {
        return Err(Error::Precondition(format!("matrix of nabla {n} is not constant")));
    }
    Ok((p.coeff(0).clone(), n.coeff(0).clone()))
}

fn log_level(c: &PadicElement) -> Result<(PadicElement, i64)> {
    let lam = c.log()?;
    let v = lam.val().unwrap_or(lam.precision());
    Ok((lam, v))
}

/// `G(c) = sum_k log(c)^k / k! D^k(I)` with `D(X) = x X' + N X`: the matrix
/// of `e^{log(c) nabla}`, i.e. `g(e_j) = sum_i G_ij e_i` with
/// `g(f)(x) = f(cx)` on scalars.
pub fn gamma_from_nabla(m: &PhiModuleX, n: u32, c: &PadicElement) -> Result<MatSeries> {
    let nab = m.nabla.as_ref().ok_or_else(|| Error::InvalidInput("matrix of nabla is required".into()))?;
    let d = m.rank();
    let tmpl = c.zero_like();
    let trunc = m.trunc();
    if c.sub_ref(&c.one_like()).is_zero() {
        return Ok(MatSeries::identity(d, trunc, &tmpl).map(|e| e.lifted(nab.precision())));
    }
    let (lam, vl) = log_level(c)?;
    if vl < n as i64 {
        return Err(Error::Domain(format!("v(log c) = {vl} is below the level {n}")));
    }
    let p = c.prime();
    let vn = match nab.valuation() {
        Valuation::Finite(v) => v.min(Rational64::from_integer(0)),
        Valuation::Infinite => Rational64::from_integer(0),
    };
    let mu = Rational64::from_integer(vl) + vn - Rational64::new(1, p as i64 - 1);
    if mu <= Rational64::from_integer(0) {
        let n0 = (Rational64::new(1, p as i64 - 1) - vn).floor().to_integer() + 1;
        return Err(Error::Domain(format!("exponential does not converge: need v(log c) >= {n0}")));
    }
    let target = nab.precision().min(lam.precision());
    let mut k = 1usize;
    while Rational64::from_integer(k as i64 + 1) * mu < Rational64::from_integer(target) {
        k += 1;
    }
    let extra = (Rational64::from_integer(k as i64) * (-vn)).ceil().to_integer();
    let work = target + vp_factorial(p, k as u64) + extra + 2;
    let nl = nab.map(|e| e.lifted(work));
    let laml = lam.lifted(work);
    let mut term = MatSeries::identity(d, trunc, &tmpl).map(|e| e.lifted(work));
    let mut sum = term.clone();
    for i in 1..=k {
        let di = nl.mul(&term).add(&term.euler());
        let kk = tmpl.from_i64_like(i as i64).lifted(work + 64);
        term = di.scale(&laml).map(|e| e.checked_div(&kk).expect("nonzero integer"));
        sum = sum.add(&term);
    }
    Ok(sum.map(|e| e.with_precision(target)))
}

/// `G_1 sigma_{c_1}(G_2)`, the matrix of `g_1 g_2`.
pub fn compose_gamma(g1: &MatSeries, c1: &PadicElement, g2: &MatSeries) -> MatSeries {
    g1.mul(&g2.twist(c1))
}

/// `G sigma_c(P) - P phi(G)`, which vanishes when the action commutes with `phi`.
pub fn gamma_phi_residual(m: &PhiModuleX, g: &MatSeries, c: &PadicElement) -> MatSeries {
    g.mul(&m.phi.twist(c)).sub(&m.phi.mul(&g.twist(m.pi())))
}

/// Recover the matrix of `nabla` from `G(c)` through the operator logarithm
/// `log(g) / log(c)` with `g(X) = G sigma_c(X)`.
pub fn nabla_from_gamma(g: &MatSeries, c: &PadicElement) -> Result<MatSeries> {
    let (lam, vl) = log_level(c)?;
    let d = g.rows();
    let trunc = g.trunc();
    let tmpl = c.zero_like();
    let ident = MatSeries::identity(d, trunc, &tmpl).map(|e| e.lifted(g.precision()));
    let w = match g.sub(&ident).valuation() {
        Valuation::Finite(v) => v.min(Rational64::from_integer(vl.min(c.sub_ref(&c.one_like()).val_or_prec()))),
        Valuation::Infinite => return Ok(MatSeries::zero(d, d, trunc, &tmpl)),
    };
    if w <= Rational64::from_integer(0) {
        return Err(Error::Domain("operator logarithm does not converge".into()));
    }
    let p = c.prime();
    let target = g.precision().min(lam.precision());
    let mut k = 1usize;
    while (k + 1..=4 * (k + 1) + p as usize).any(|j| {
        Rational64::from_integer(j as i64) * w
            - Rational64::from_integer(vp_factorial(p, j as u64) - vp_factorial(p, j as u64 - 1))
            < Rational64::from_integer(target)
    }) {
        k += 1;
    }
    let work = target + vp_factorial(p, k as u64) + 2;
    let gl = g.map(|e| e.lifted(work));
    let cl = c.lifted(work);
    let delta = |x: &MatSeries| gl.mul(&x.twist(&cl)).sub(x);
    let mut power = MatSeries::identity(d, trunc, &tmpl).map(|e| e.lifted(work));
    let mut sum = MatSeries::zero(d, d, trunc, &tmpl);
    for i in 1..=k {
        power = delta(&power);
        let kk = tmpl.from_i64_like(i as i64).lifted(work + 64);
        let term = power.map(|e| e.checked_div(&kk).expect("nonzero integer"));
        sum = if i % 2 == 1 { sum.add(&term) } else { sum.sub(&term) };
    }
    let logs = sum.map(|e| e.with_precision(target));
    Ok(logs.map(|e| e.checked_div(&lam).expect("nonzero log")).map(|e| e.with_precision(target - vl)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicField;

    fn k5() -> PadicField {
        PadicField::qp(5, 20).unwrap()
    }

    fn ms(k: &PadicField, rows: &[&[&[i64]]], n: usize) -> MatSeries {
        // rows[i][j] = coefficient list of entry (i, j)
        let d = rows.len();
        let coeffs = (0..=n)
            .map(|deg| Matrix::from_fn(d, rows[0].len(), |i, j| k.from_i64(*rows[i][j].get(deg).unwrap_or(&0))))
            .collect();
        MatSeries::new(coeffs).unwrap()
    }

    #[test]
    fn kernels() {
        let k = k5();
        let pi = k.p_power(1);
        let ker = kernel_phi_minus_alpha(&k.from_i64(25), &pi, 6).unwrap();
        assert_eq!(ker.len(), 1);
        assert_eq!(ker[0].order(), Some(2));
        assert_eq!(kernel_phi_minus_alpha(&k.one(), &pi, 6).unwrap()[0].order(), Some(0));
        assert!(kernel_phi_minus_alpha(&k.from_i64(2), &pi, 6).unwrap().is_empty());
    }

    #[test]
    fn solves() {
        let k = k5();
        let pi = k.p_power(1);
        let x = TruncSeries::var(4, &k.one());
        let alpha = k.from_i64(2);
        let f = solve_phi_minus_alpha(&alpha, &pi, &x).unwrap();
        assert_eq!(f.coeff(1), &k.one().checked_div(&k.from_i64(3)).unwrap());
        assert!(matches!(solve_phi_minus_alpha(&pi, &pi, &x), Err(Error::Resonance { index: 1, .. })));
        let x2 = x.mul(&x);
        let f = solve_phi_minus_alpha(&pi, &pi, &x2).unwrap();
        assert_eq!(f.coeff(2), &k.one().checked_div(&k.from_i64(20)).unwrap());
    }

    #[test]
    fn resonant_example() {
        let k = k5();
        let pi = k.p_power(1);
        let phi = ms(&k, &[&[&[1], &[0, 1]], &[&[0], &[5]]], 4);
        let m = PhiModuleX::new(pi, phi, None).unwrap();
        let nf = normal_form(&m, None).unwrap();
        assert_eq!(nf.resonances.len(), 1);
        assert_eq!(nf.resonances[0].degree, 1);
        assert!(nf.residual.is_zero());
        let flag = full_flag(&m).unwrap();
        assert_eq!(flag.eigenvalues[0], k.one());
    }

    #[test]
    fn non_resonant_example() {
        let k = k5();
        let pi = k.p_power(1);
        let phi = ms(&k, &[&[&[1], &[0, 1]], &[&[0], &[2]]], 4);
        let m = PhiModuleX::new(pi, phi, None).unwrap();
        let nf = normal_form(&m, None).unwrap();
        assert!(nf.resonances.is_empty());
        assert!(nf.nilpotent.iter().all(|(_, n)| n.is_zero()));
    }

    #[test]
    fn ideals() {
        let k = k5();
        let f = TruncSeries::new(vec![k.zero(), k.zero(), k.from_i64(3)], 5, &k.one());
        assert_eq!(classify_stable_ideal(&f).unwrap(), 2);
        let g = TruncSeries::new(vec![k.zero(), k.zero(), k.one(), k.one()], 5, &k.one());
        assert!(classify_stable_ideal(&g).is_err());
        assert_eq!(classify_stable_ideal(&TruncSeries::constant(k.one(), 5)).unwrap(), 0);
    }

    #[test]
    fn rank_one() {
        let k = k5();
        let pi = k.p_power(1);
        let m = PhiModuleX::new(pi.clone(), ms(&k, &[&[&[5]]], 3), Some(ms(&k, &[&[&[-1]]], 3))).unwrap();
        let (d, w) = rank1_character(&m).unwrap();
        assert_eq!(d, pi);
        assert_eq!(w, k.from_i64(-1));
        assert!(PhiModuleX::new(pi, ms(&k, &[&[&[1]]], 3), Some(ms(&k, &[&[&[0, 1]]], 3))).is_err());
    }

    #[test]
    fn gamma_rank_one() {
        let k = k5();
        let pi = k.p_power(1);
        let w = k.from_i64(3);
        let m = PhiModuleX::new(pi, ms(&k, &[&[&[1]]], 3), Some(ms(&k, &[&[&[3]]], 3))).unwrap();
        let c = k.from_i64(6);
        let g = gamma_from_nabla(&m, 1, &c).unwrap();
        let expected = c.log().unwrap().mul_ref(&w).exp().unwrap();
        assert_eq!(g.coeff(0).get(0, 0), &expected);
        assert!(nabla_from_gamma(&g, &c).unwrap().eq_at_precision(m.nabla_matrix().unwrap()));
    }
}
