//! Dense symmetric linear algebra.
//!
//! Everything here works on full `n x n` storage. Eliminating an index with
//! [`schur_complement`] keeps the shape and zeroes the eliminated row and
//! column, so indices stay stable across greedy rounds.

mod rank_one;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use rank_one::update_diagonalization;

/// Default tolerance on `||Q diag(lambda) Q' - X||_F / (1 + ||X||_F)`.
pub const TOL_RECON: f64 = 1e-9;

/// Relative pivot tolerance, scaled by `max |X_ij|`.
pub const TOL_PIVOT: f64 = 1e-12;

/// A real symmetric matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    inner: DMatrix<f64>,
}

impl SymMatrix {
    /// Wraps a square matrix, replacing it by `(X + X') / 2` so that the stored
    /// entries are exactly symmetric.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || m.ncols() != n {
            return Err(Error::invalid(format!(
                "expected a nonempty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let mut inner = m;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (inner[(i, j)] + inner[(j, i)]);
                inner[(i, j)] = avg;
                inner[(j, i)] = avg;
            }
        }
        Ok(SymMatrix { inner })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("rows do not form a square matrix"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            inner: DMatrix::zeros(n, n),
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymMatrix {
            inner: DMatrix::from_diagonal(&DVector::from_column_slice(d)),
        }
    }

    /// Symmetric rank-one matrix `v v'`.
    pub fn outer(v: &DVector<f64>) -> Self {
        SymMatrix {
            inner: v * v.transpose(),
        }
    }

    /// Gram matrix `A' A` of a rectangular matrix.
    pub fn gram(a: &DMatrix<f64>) -> Result<Self> {
        Self::new(a.transpose() * a)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn diagonal(&self) -> DVector<f64> {
        self.inner.diagonal()
    }

    pub fn column(&self, j: usize) -> DVector<f64> {
        self.inner.column(j).into_owned()
    }

    pub fn trace(&self) -> f64 {
        self.inner.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.amax()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// The principal submatrix `X|_S` as a `|S| x |S|` matrix.
    pub fn principal(&self, s: &SupportSet) -> DMatrix<f64> {
        let idx = s.as_slice();
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.inner[(idx[a], idx[b])])
    }

    /// `det(X|_S)`; the empty minor is 1.
    pub fn minor(&self, s: &SupportSet) -> f64 {
        if s.is_empty() {
            return 1.0;
        }
        self.principal(s).lu().determinant()
    }

    /// Full-size copy with every row and column outside `keep` set to zero.
    pub fn masked(&self, keep: &[bool]) -> SymMatrix {
        let n = self.n();
        SymMatrix {
            inner: DMatrix::from_fn(n, n, |i, j| {
                if keep[i] && keep[j] {
                    self.inner[(i, j)]
                } else {
                    0.0
                }
            }),
        }
    }

    /// `D X D` for diagonal `D`.
    pub fn scale_diagonal(&self, d: &[f64]) -> SymMatrix {
        let n = self.n();
        SymMatrix {
            inner: DMatrix::from_fn(n, n, |i, j| d[i] * self.inner[(i, j)] * d[j]),
        }
    }

    /// `t * A1 - A0`.
    pub fn pencil(a1: &SymMatrix, t: f64, a0: &SymMatrix) -> SymMatrix {
        SymMatrix {
            inner: &a1.inner * t - &a0.inner,
        }
    }

    /// `self + t * I` restricted to the indices in `mask`.
    pub fn add_diagonal_on(&self, t: f64, mask: &[bool]) -> SymMatrix {
        let mut inner = self.inner.clone();
        for (i, &on) in mask.iter().enumerate() {
            if on {
                inner[(i, i)] += t;
            }
        }
        SymMatrix { inner }
    }

    /// `self + rho * v v'`.
    pub fn rank_one_update(&self, rho: f64, v: &DVector<f64>) -> SymMatrix {
        let mut inner = self.inner.clone();
        inner.ger(rho, v, v, 1.0);
        SymMatrix::new(inner).expect("finite rank-one update")
    }

    pub fn is_positive_definite(&self) -> bool {
        self.inner.clone().cholesky().is_some()
    }
}

/// Strictly increasing set of column indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn empty() -> Self {
        SupportSet::default()
    }

    /// Sorts the given indices and checks that they are distinct and `< n`.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate index in {indices:?}")));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(Error::invalid(format!("index {last} out of range for n = {n}")));
            }
        }
        Ok(SupportSet { indices })
    }

    /// `{0, .., k-1}`.
    pub fn prefix(k: usize) -> Self {
        SupportSet {
            indices: (0..k).collect(),
        }
    }

    pub fn full(n: usize) -> Self {
        Self::prefix(n)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    /// `T + j`; inserting an existing index is a no-op.
    pub fn with(&self, j: usize) -> SupportSet {
        let mut indices = self.indices.clone();
        if let Err(pos) = indices.binary_search(&j) {
            indices.insert(pos, j);
        }
        SupportSet { indices }
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &i in &self.indices {
            m[i] = true;
        }
        m
    }

    pub fn complement(&self, n: usize) -> SupportSet {
        let m = self.mask(n);
        SupportSet {
            indices: (0..n).filter(|&i| !m[i]).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &SupportSet) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.indices
    }
}

/// `X = Q diag(lambda) Q'` with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub q: DMatrix<f64>,
    pub lambda: DVector<f64>,
}

impl EigenDecomposition {
    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.q.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.lambda[j];
        }
        scaled * self.q.transpose()
    }

    /// `||Q'Q - I||_F`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.n();
        (self.q.transpose() * &self.q - DMatrix::<f64>::identity(n, n)).norm()
    }

    /// `||Q Lambda Q' - X||_F / (1 + ||X||_F)`.
    pub fn reconstruction_error(&self, x: &SymMatrix) -> f64 {
        (self.reconstruct() - x.as_matrix()).norm() / (1.0 + x.frobenius_norm())
    }

    /// Decomposition of `t I + sign * X` reusing the eigenbasis; `sign` must be `1.0` or `-1.0`.
    pub fn shifted(&self, t: f64, sign: f64) -> EigenDecomposition {
        let lambda = self.lambda.map(|l| t + sign * l);
        sort_ascending(self.q.clone(), lambda)
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda[self.n() - 1]
    }
}

pub(crate) fn sort_ascending(q: DMatrix<f64>, lambda: DVector<f64>) -> EigenDecomposition {
    let n = lambda.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| lambda[a].total_cmp(&lambda[b]));
    if order.iter().enumerate().all(|(i, &o)| i == o) {
        return EigenDecomposition { q, lambda };
    }
    let lambda_sorted = DVector::from_iterator(n, order.iter().map(|&o| lambda[o]));
    let q_sorted = DMatrix::from_fn(q.nrows(), n, |i, j| q[(i, order[j])]);
    EigenDecomposition {
        q: q_sorted,
        lambda: lambda_sorted,
    }
}

/// Full symmetric eigendecomposition, eigenvalues ascending.
pub fn diagonalize(x: &SymMatrix) -> Result<EigenDecomposition> {
    let eig = SymmetricEigen::new(x.as_matrix().clone());
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("eigensolver returned non-finite values".into()));
    }
    Ok(sort_ascending(eig.eigenvectors, eig.eigenvalues))
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(x: &SymMatrix) -> DVector<f64> {
    let mut ev: Vec<f64> = x.as_matrix().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    DVector::from_vec(ev)
}

/// `X - X_j X_j' / X_jj`, keeping the `n x n` shape; row and column `j` become zero.
pub fn schur_complement(x: &SymMatrix, j: usize) -> Result<SymMatrix> {
    let n = x.n();
    if j >= n {
        return Err(Error::invalid(format!("index {j} out of range for n = {n}")));
    }
    let pivot = x.get(j, j);
    if pivot.abs() <= TOL_PIVOT * x.max_abs() || pivot == 0.0 {
        return Err(Error::SingularPivot { index: j, pivot });
    }
    let col = x.column(j);
    let mut m = x.as_matrix().clone();
    m.ger(-1.0 / pivot, &col, &col, 1.0);
    for i in 0..n {
        m[(i, j)] = 0.0;
        m[(j, i)] = 0.0;
    }
    SymMatrix::new(m)
}

/// Full-shape Schur complement `X \ T` together with `det(X|_T)`.
///
/// Rows and columns in `T` are zero in the result; the block on the
/// complement is `X|_{T^c} - X_{T^c,T} (X|_T)^{-1} X_{T,T^c}`.
pub fn schur_complement_set(x: &SymMatrix, t: &SupportSet) -> Result<(SymMatrix, f64)> {
    let n = x.n();
    if t.is_empty() {
        return Ok((x.clone(), 1.0));
    }
    let lu = x.principal(t).lu();
    let det = lu.determinant();
    let min_pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |m, p| m.min(p.abs()));
    if !det.is_finite() || min_pivot <= TOL_PIVOT * x.max_abs() {
        return Err(Error::SingularConditioning {
            support: t.as_slice().to_vec(),
        });
    }
    let tidx = t.as_slice();
    let cross = DMatrix::from_fn(tidx.len(), n, |a, j| x.get(tidx[a], j));
    let solved = lu.solve(&cross).ok_or_else(|| Error::SingularConditioning {
        support: tidx.to_vec(),
    })?;
    let mut m = x.as_matrix() - cross.transpose() * solved;
    for &i in tidx {
        for j in 0..n {
            m[(i, j)] = 0.0;
            m[(j, i)] = 0.0;
        }
    }
    Ok((SymMatrix::new(m)?, det))
}

/// Exact optimum of `max x'A0x s.t. x'A1x = 1, supp(x) ⊆ T`.
///
/// Returns the value and a witness in `R^n` with `x'A1x = 1`. The witness
/// sign is fixed so that its largest-magnitude entry is positive.
pub fn inner_qcqp_solve(a0: &SymMatrix, a1: &SymMatrix, t: &SupportSet) -> Result<(f64, DVector<f64>)> {
    let n = a0.n();
    if a1.n() != n {
        return Err(Error::invalid("A0 and A1 have different dimensions"));
    }
    if t.is_empty() {
        return Err(Error::invalid("support must be nonempty"));
    }
    if t.as_slice().last().copied().unwrap_or(0) >= n {
        return Err(Error::invalid("support index out of range"));
    }
    let chol = a1
        .principal(t)
        .cholesky()
        .ok_or_else(|| Error::InfeasibleSupport {
            support: t.as_slice().to_vec(),
        })?;
    let l = chol.l();
    // M = L^{-1} A0|_T L^{-T}
    let left = l
        .solve_lower_triangular(&a0.principal(t))
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let m = l
        .solve_lower_triangular(&left.transpose())
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let m = SymMatrix::new(m)?;
    let eig = diagonalize(&m)?;
    let top = eig.n() - 1;
    let y = eig.q.column(top).into_owned();
    let xt = l
        .transpose()
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let mut x = DVector::zeros(n);
    for (a, i) in t.iter().enumerate() {
        x[i] = xt[a];
    }
    let imax = x.iamax();
    if x[imax] < 0.0 {
        x.neg_mut();
    }
    Ok((eig.lambda[top], x))
}

/// Range `[mu_min, mu_max]` of the generalized eigenvalues of the pencil `(A0, A1)`.
///
/// Every real root of `p|_T(A1 t - A0)` lies in this interval when `A1` is
/// positive definite.
pub fn pencil_spectrum_range(a0: &SymMatrix, a1: &SymMatrix) -> Result<(f64, f64)> {
    let full = SupportSet::full(a0.n());
    let chol = a1
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::invalid("A1 must be positive definite"))?;
    let l = chol.l();
    let left = l
        .solve_lower_triangular(&a0.principal(&full))
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let m = l
        .solve_lower_triangular(&left.transpose())
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let ev = eigenvalues(&SymMatrix::new(m)?);
    Ok((ev[0], ev[ev.len() - 1]))
}
