//! LPM polynomials: oracles, conditioning, univariate restriction and `eta`.
//!
//! An LPM polynomial of degree `k` on `n x n` symmetric matrices is
//! `p(X) = sum_S a_S det(X|_S)` over `k`-subsets `S` with `a_S >= 0`. Its
//! conditional on `T` keeps only the terms with `S ⊇ T`.

mod poly;

use std::collections::BTreeMap;

pub use poly::{
    chebyshev_nodes, max_root_newton, max_root_newton_traced, EtaResult, NewtonPath, UnivariatePoly, REAL_ROOT_TOL,
    TRIM_TOL,
};

use crate::charpoly::char_coeff;
use crate::linalg::{eigenvalues, pencil_spectrum_range, schur_complement_set, SupportSet, SymMatrix};
use crate::verify::{subsets, OracleBudget};
use crate::{Error, Result};

/// Relative level below which every node evaluation counts as zero.
pub const ZERO_POLY_TOL: f64 = 1e-12;

/// Which `k`-subsets carry a nonzero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    /// Every `k`-subset of `[n]`.
    All { n: usize, k: usize },
    Explicit { n: usize, sets: Vec<SupportSet> },
    /// `k`-subsets meeting each of the pairwise disjoint `sets`.
    Crossing { n: usize, k: usize, sets: Vec<SupportSet> },
    /// Members of `base` contained in the kept indices.
    Masked { base: Box<Support>, keep: Vec<bool> },
}

impl Support {
    pub fn contains(&self, s: &SupportSet) -> bool {
        match self {
            Support::All { n, k } => s.len() == *k && s.iter().all(|i| i < *n),
            Support::Explicit { sets, .. } => sets.contains(s),
            Support::Crossing { n, k, sets } => {
                s.len() == *k && s.iter().all(|i| i < *n) && sets.iter().all(|a| a.iter().any(|i| s.contains(i)))
            }
            Support::Masked { base, keep } => s.iter().all(|i| keep.get(i).copied().unwrap_or(false)) && base.contains(s),
        }
    }

    fn shape(&self) -> (usize, usize) {
        match self {
            Support::All { n, k } | Support::Crossing { n, k, .. } => (*n, *k),
            Support::Explicit { n, sets } => (*n, sets.first().map_or(0, |s| s.len())),
            Support::Masked { base, .. } => base.shape(),
        }
    }

    /// Lexicographic list of members, refusing to exceed `budget`.
    pub fn enumerate(&self, budget: &OracleBudget) -> Result<Vec<SupportSet>> {
        if let Support::Explicit { sets, .. } = self {
            if sets.len() > budget.max_subsets {
                return Err(Error::BudgetExceeded(format!("{} explicit supports", sets.len())));
            }
            let mut out = sets.clone();
            out.sort();
            return Ok(out);
        }
        let (n, k) = self.shape();
        budget.check(n, k)?;
        Ok(subsets(n, k).filter(|s| self.contains(s)).collect())
    }
}

/// Evaluator for an LPM polynomial.
pub trait LpmOracle: Sync {
    fn dim(&self) -> usize;
    fn degree(&self) -> usize;
    fn evaluate(&self, x: &SymMatrix) -> Result<f64>;
    fn support(&self) -> Support;

    /// Upper bound on `|p(X)|` over `||X||_2 <= 1`.
    ///
    /// `p(I)` for a true LPM polynomial; wrappers that can vanish at the
    /// identity override it.
    fn magnitude_bound(&self) -> Result<f64> {
        self.evaluate(&SymMatrix::identity(self.dim()))
    }
}

impl<P: LpmOracle + ?Sized> LpmOracle for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn degree(&self) -> usize {
        (**self).degree()
    }
    fn evaluate(&self, x: &SymMatrix) -> Result<f64> {
        (**self).evaluate(x)
    }
    fn support(&self) -> Support {
        (**self).support()
    }
    fn magnitude_bound(&self) -> Result<f64> {
        (**self).magnitude_bound()
    }
}

impl<P: LpmOracle + ?Sized + Send> LpmOracle for Box<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn degree(&self) -> usize {
        (**self).degree()
    }
    fn evaluate(&self, x: &SymMatrix) -> Result<f64> {
        (**self).evaluate(x)
    }
    fn support(&self) -> Support {
        (**self).support()
    }
    fn magnitude_bound(&self) -> Result<f64> {
        (**self).magnitude_bound()
    }
}

fn check_dim(p: &(impl LpmOracle + ?Sized), x: &SymMatrix) -> Result<()> {
    if x.n() != p.dim() {
        return Err(Error::invalid(format!("oracle expects {0}x{0}, got {1}x{1}", p.dim(), x.n())));
    }
    Ok(())
}

/// The characteristic coefficient `c_n^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharCoeffOracle {
    n: usize,
    k: usize,
}

impl CharCoeffOracle {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::invalid(format!("degree {k} must be in 1..={n}")));
        }
        Ok(CharCoeffOracle { n, k })
    }
}

impl LpmOracle for CharCoeffOracle {
    fn dim(&self) -> usize {
        self.n
    }
    fn degree(&self) -> usize {
        self.k
    }
    fn evaluate(&self, x: &SymMatrix) -> Result<f64> {
        check_dim(self, x)?;
        char_coeff(x, self.k)
    }
    fn support(&self) -> Support {
        Support::All { n: self.n, k: self.k }
    }
}

/// Literal `sum_S a_S det(X|_S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorSumOracle {
    n: usize,
    k: usize,
    coeffs: BTreeMap<SupportSet, f64>,
}

impl MinorSumOracle {
    pub fn new(n: usize, k: usize, coeffs: BTreeMap<SupportSet, f64>) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::invalid(format!("degree {k} must be in 1..={n}")));
        }
        for (s, &a) in &coeffs {
            if s.len() != k || s.iter().any(|i| i >= n) {
                return Err(Error::invalid(format!("support {:?} is not a {k}-subset of [{n}]", s.as_slice())));
            }
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::invalid("LPM coefficients must be finite and nonnegative"));
            }
        }
        if coeffs.values().all(|&a| a == 0.0) {
            return Err(Error::invalid("LPM polynomial must not be identically zero"));
        }
        Ok(MinorSumOracle { n, k, coeffs })
    }

    /// `det(X|_S)` alone.
    pub fn single(s: SupportSet, n: usize) -> Result<Self> {
        let k = s.len();
        Self::new(n, k, BTreeMap::from([(s, 1.0)]))
    }

    pub fn coefficients(&self) -> &BTreeMap<SupportSet, f64> {
        &self.coeffs
    }
}

impl LpmOracle for MinorSumOracle {
    fn dim(&self) -> usize {
        self.n
    }
    fn degree(&self) -> usize {
        self.k
    }
    fn evaluate(&self, x: &SymMatrix) -> Result<f64> {
        check_dim(self, x)?;
        Ok(self.coeffs.iter().filter(|(_, &a)| a != 0.0).map(|(s, a)| a * x.minor(s)).sum())
    }
    fn support(&self) -> Support {
        Support::Explicit {
            n: self.n,
            sets: self.coeffs.iter().filter(|(_, &a)| a > 0.0).map(|(s, _)| s.clone()).collect(),
        }
    }
}

/// `X -> p(D X D)` for diagonal `D`.
#[derive(Debug, Clone)]
pub struct Reweighted<P> {
    inner: P,
    d: Vec<f64>,
}

pub fn reweighted_oracle<P: LpmOracle>(p: P, d: &[f64]) -> Result<Reweighted<P>> {
    if d.len() != p.dim() {
        return Err(Error::invalid("reweighting vector has the wrong length"));
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("reweighting vector must be finite"));
    }
    Ok(Reweighted { inner: p, d: d.to_vec() })
}

impl<P: LpmOracle> LpmOracle for Reweighted<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn degree(&self) -> usize {
        self.inner.degree()
    }
    fn evaluate(&self, x: &SymMatrix) -> Result<f64> {
        check_dim(self, x)?;
        self.inner.evaluate(&x.scale_diagonal(&self.d))
    }
    fn support(&self) -> Support {
        Support::Masked {
            base: Box::new(self.inner.support()),
            keep: self.d.iter().map(|&v| v != 0.0).collect(),
        }
    }
    fn magnitude_bound(&self) -> Result<f64> {
        let d2 = self.d.iter().fold(0.0f64, |m, v| m.max(v * v));
        Ok(self.inner.magnitude_bound()? * d2.powi(self.degree() as i32))
    }
}

/// Terms of `c_n^k` whose index set meets every one of `sets`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedCharOracle {
    n: usize,
    k: usize,
    sets: Vec<SupportSet>,
    /// `(sign, kept-index mask)` for each inclusion–exclusion term.
    terms: Vec<(f64, Vec<bool>)>,
}

/// Largest number of constraint sets accepted; evaluation costs `2^l` terms.
pub const MAX_CONSTRAINT_SETS: usize = 20;

pub fn constrained_char_oracle(sets: &[SupportSet], n: usize, k: usize) -> Result<ConstrainedCharOracle> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("degree {k} must be in 1..={n}")));
    }
    if sets.len() > MAX_CONSTRAINT_SETS {
        return Err(Error::ResourceLimit(format!(
            "{} constraint sets exceed the limit of {MAX_CONSTRAINT_SETS}",
            sets.len()
        )));
    }
    let mut seen = vec![false; n];
    for s in sets {
        if s.is_empty() {
            return Err(Error::invalid("constraint sets must be nonempty"));
        }
        for i in s.iter() {
            if i >= n {
                return Err(Error::invalid(format!("index {i} out of range")));
            }
            if seen[i] {
                return Err(Error::invalid("constraint sets must be pairwise disjoint"));
            }
            seen[i] = true;
        }
    }
    // p_i(X) = p_{i-1}(X) - p_{i-1}(X restricted to the complement of S_i),
    // unrolled into a signed sum over subsets of constraints.
    let l = sets.len();
    let terms = (0u32..1 << l)
        .map(|bits| {
            let mut keep = vec![true; n];
            for (i, s) in sets.iter().enumerate() {
                if bits & (1 << i) != 0 {
                    for j in s.iter() {
                        keep[j] = false;
                    }
                }
            }
            let sign = if bits.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            (sign, keep)
        })
        .collect();
    Ok(ConstrainedCharOracle {
        n,
        k,
        sets: sets.to_vec(),
        terms,
    })
}

impl LpmOracle for ConstrainedCharOracle {
    fn dim(&self) -> usize {
        self.n
    }
    fn degree(&self) -> usize {
        self.k
    }
    fn evaluate(&self, x: &SymMatrix) -> Result<f64> {
        check_dim(self, x)?;
        let mut total = 0.0;
        for (sign, keep) in &self.terms {
            if keep.iter().filter(|&&b| b).count() < self.k {
                continue;
            }
            total += sign * char_coeff(&x.masked(keep), self.k)?;
        }
        Ok(total)
    }
    fn support(&self) -> Support {
        Support::Crossing {
            n: self.n,
            k: self.k,
            sets: self.sets.clone(),
        }
    }
}

/// `p|_T(X) = det(X|_T) * p_{-T}(X \ T)`.
///
/// `p_{-T}(Y)` is the coefficient of `t^{|T|}` in `t -> p(Y + t 1_T)`, read
/// off an interpolant through `k + 1` evaluations of `p`.
pub fn conditional_eval<P: LpmOracle + ?Sized>(p: &P, t: &SupportSet, x: &SymMatrix) -> Result<f64> {
    check_dim(p, x)?;
    let k = p.degree();
    if t.len() > k {
        return Err(Error::invalid(format!("cannot condition a degree-{k} polynomial on {} indices", t.len())));
    }
    if t.is_empty() {
        return p.evaluate(x);
    }
    let (y, det) = schur_complement_set(x, t)?;
    let mask = t.mask(x.n());
    let radius = if y.max_abs() > 0.0 { y.max_abs() } else { 1.0 };
    let nodes = chebyshev_nodes(-radius, radius, k + 1);
    let values = nodes
        .iter()
        .map(|&s| p.evaluate(&y.add_diagonal_on(s, &mask)))
        .collect::<Result<Vec<_>>>()?;
    let h = UnivariatePoly::interpolate(&nodes, &values)?;
    let lead = h.to_monomial().get(t.len()).copied().unwrap_or(0.0);
    Ok(det * lead)
}

/// Magnitude against which node evaluations are judged to vanish:
/// `p(I) * max_i ||X_i||_2^k`, an upper bound on `|p|_T(X_i)|`.
pub fn evaluation_scale<P: LpmOracle + ?Sized>(p: &P, mats: &[SymMatrix]) -> Result<f64> {
    let at_identity = p.magnitude_bound()?;
    let norm = mats
        .iter()
        .map(|m| {
            let ev = eigenvalues(m);
            ev[0].abs().max(ev[ev.len() - 1].abs())
        })
        .fold(0.0, f64::max);
    Ok(at_identity * norm.powi(p.degree() as i32))
}

/// Chebyshev nodes on the pencil spectrum, widened below by a tenth of its
/// spread and above by `sqrt(2)` times that.
pub fn default_nodes(a0: &SymMatrix, a1: &SymMatrix, count: usize) -> Result<Vec<f64>> {
    let (lo, hi) = pencil_spectrum_range(a0, a1)?;
    Ok(chebyshev_nodes_on_bracket(lo, hi, count))
}

/// Chebyshev nodes on `[lo - d, hi + sqrt(2) d]`, `d = (hi - lo) / 10`.
///
/// The lopsided margin keeps the middle node of an odd count off the
/// midpoint of the spectrum, where integer-valued or isotropic data tend to
/// place an eigenvalue of some sub-pencil (which would zero a pivot).
pub fn chebyshev_nodes_on_bracket(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let spread = hi - lo;
    let magnitude = hi.abs().max(lo.abs()).max(1.0);
    let delta = if spread > 1e-12 * magnitude { 0.1 * spread } else { 0.1 * magnitude };
    chebyshev_nodes(lo - delta, hi + std::f64::consts::SQRT_2 * delta, count)
}

/// Interpolant of node samples of a degree-`degree` polynomial, or the zero
/// polynomial when every sample is below `ZERO_POLY_TOL * scale`.
pub fn polynomial_from_samples(nodes: &[f64], values: &[f64], degree: usize, scale: f64) -> Result<UnivariatePoly> {
    poly::check_distinct(nodes)?;
    if values.iter().all(|v| v.abs() <= ZERO_POLY_TOL * scale) {
        return Ok(UnivariatePoly::zero());
    }
    Ok(UnivariatePoly::interpolate(nodes, values)?.truncate(degree))
}

/// `g(t) = p|_T(A1 t - A0)` through samples at `nodes`.
pub fn restrict_univariate<P: LpmOracle + ?Sized>(
    p: &P,
    t: &SupportSet,
    a0: &SymMatrix,
    a1: &SymMatrix,
    nodes: &[f64],
) -> Result<UnivariatePoly> {
    if a0.n() != p.dim() || a1.n() != p.dim() {
        return Err(Error::invalid("instance dimension does not match the oracle"));
    }
    let k = p.degree();
    if nodes.len() < k + 1 {
        return Err(Error::invalid(format!("{} nodes cannot determine a degree-{k} polynomial", nodes.len())));
    }
    let mats: Vec<SymMatrix> = nodes.iter().map(|&s| SymMatrix::pencil(a1, s, a0)).collect();
    let values = mats
        .iter()
        .map(|m| conditional_eval(p, t, m))
        .collect::<Result<Vec<_>>>()?;
    polynomial_from_samples(nodes, &values, k, evaluation_scale(p, &mats)?)
}

/// Largest real root of a sampled polynomial, started from its Cauchy bound.
pub fn eta_of(g: &UnivariatePoly) -> EtaResult {
    if g.is_zero() {
        return EtaResult::zero();
    }
    max_root_newton(g, g.cauchy_bound())
}

/// `eta` of `p|_T` on the instance `(A0, A1)` with `k + 1` default nodes.
pub fn eta<P: LpmOracle + ?Sized>(p: &P, t: &SupportSet, a0: &SymMatrix, a1: &SymMatrix) -> Result<EtaResult> {
    let nodes = default_nodes(a0, a1, p.degree() + 1)?;
    eta_with_nodes(p, t, a0, a1, &nodes)
}

pub fn eta_with_nodes<P: LpmOracle + ?Sized>(
    p: &P,
    t: &SupportSet,
    a0: &SymMatrix,
    a1: &SymMatrix,
    nodes: &[f64],
) -> Result<EtaResult> {
    Ok(eta_of(&restrict_univariate(p, t, a0, a1, nodes)?))
}
