//! Greedy conditioning: the generic heuristic over any LPM oracle, and the
//! characteristic method specialised to `c_n^k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charpoly::{char_coeff_from_decomp, conditionals_with_magnitude};
use crate::linalg::{
    diagonalize, eigenvalues, inner_qcqp_solve, schur_complement, update_diagonalization, EigenDecomposition,
    SupportSet, SymMatrix, TOL_PIVOT,
};
use crate::lpm::{default_nodes, eta_of, eta_with_nodes, LpmOracle, UnivariatePoly, ZERO_POLY_TOL};
use crate::verify::OracleBudget;
use crate::{Error, Result};

/// Absolute slack within which two candidate scores count as tied.
pub const ETA_TIE_TOL: f64 = 1e-12;

/// One greedy step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub chosen: usize,
    pub eta: f64,
    /// Score of every index; `-inf` for members of `T` and skipped candidates.
    pub candidate_etas: Vec<f64>,
    /// Candidates excluded this round (singular pivot or vanishing polynomial).
    pub skipped: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub rounds: Vec<Round>,
    pub support: SupportSet,
    /// Inner fixed-support optimum on `support`.
    pub value: f64,
    /// `eta` of the unconditioned polynomial.
    pub eta_root: f64,
    pub nodes: Vec<f64>,
}

impl GreedyTrace {
    pub fn etas(&self) -> Vec<f64> {
        self.rounds.iter().map(|r| r.eta).collect()
    }
}

/// Smallest index whose score is within `ETA_TIE_TOL` of the best.
pub(crate) fn select(scores: &[Option<f64>]) -> Option<usize> {
    let best = scores.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    if scores.iter().all(Option::is_none) {
        return None;
    }
    scores
        .iter()
        .position(|s| s.is_some_and(|v| v >= best - ETA_TIE_TOL || v == best))
}

fn check_instance(a0: &SymMatrix, a1: &SymMatrix, k: usize) -> Result<usize> {
    let n = a0.n();
    if a1.n() != n {
        return Err(Error::invalid("A0 and A1 have different dimensions"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must be in 1..={n}")));
    }
    if !a1.is_positive_definite() {
        return Err(Error::invalid("A1 must be positive definite"));
    }
    Ok(n)
}

fn finish_round(n: usize, support: &SupportSet, scores: Vec<Option<f64>>) -> Result<Round> {
    let chosen = select(&scores).ok_or_else(|| Error::ExhaustedSupport {
        partial: support.as_slice().to_vec(),
    })?;
    let skipped = (0..n).filter(|&j| !support.contains(j) && scores[j].is_none()).collect();
    Ok(Round {
        chosen,
        eta: scores[chosen].unwrap_or(f64::NEG_INFINITY),
        candidate_etas: scores.iter().map(|s| s.unwrap_or(f64::NEG_INFINITY)).collect(),
        skipped,
    })
}

/// Generic greedy conditioning over an arbitrary LPM oracle of degree `k`.
///
/// Each round scores every unused index `j` by `eta(p|_{T+j})`, computed
/// from `k + 1` interpolation nodes, and adds the best one.
pub fn greedy_conditioning<P: LpmOracle + ?Sized>(p: &P, a0: &SymMatrix, a1: &SymMatrix, k: usize) -> Result<GreedyTrace> {
    let n = check_instance(a0, a1, k)?;
    if p.dim() != n || p.degree() != k {
        return Err(Error::invalid("oracle shape does not match the instance"));
    }
    let nodes = default_nodes(a0, a1, k + 1)?;
    let eta_root = eta_with_nodes(p, &SupportSet::empty(), a0, a1, &nodes)?.eta;
    let mut support = SupportSet::empty();
    let mut rounds = Vec::with_capacity(k);
    for _ in 0..k {
        let scores = (0..n)
            .into_par_iter()
            .map(|j| {
                if support.contains(j) {
                    return Ok(None);
                }
                match eta_with_nodes(p, &support.with(j), a0, a1, &nodes) {
                    Ok(r) if r.zero_polynomial => Ok(None),
                    Ok(r) => Ok(Some(r.eta)),
                    Err(Error::SingularConditioning { .. } | Error::SingularPivot { .. }) => Ok(None),
                    Err(e) => Err(e),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let round = finish_round(n, &support, scores)?;
        support = support.with(round.chosen);
        rounds.push(round);
    }
    let value = inner_qcqp_solve(a0, a1, &support)?.0;
    Ok(GreedyTrace {
        rounds,
        support,
        value,
        eta_root,
        nodes,
    })
}

/// Per-node state of the characteristic method.
#[derive(Debug, Clone)]
pub struct EvalMatrixState {
    /// Current full-shape Schur complement; rows and columns of `T` are zero.
    pub x: SymMatrix,
    pub decomp: EigenDecomposition,
    /// `det(X_0|_T)` of the original node matrix.
    pub det_t: f64,
    max_abs: f64,
}

impl EvalMatrixState {
    pub fn from_matrix(x: SymMatrix) -> Result<Self> {
        let decomp = diagonalize(&x)?;
        Ok(Self::from_decomposition(x, decomp))
    }

    pub fn from_decomposition(x: SymMatrix, decomp: EigenDecomposition) -> Self {
        let max_abs = x.max_abs();
        EvalMatrixState {
            x,
            decomp,
            det_t: 1.0,
            max_abs,
        }
    }

    /// `p|_{T+j}(X_0)` for every `j`, with `p = c_n^{|T| + degree}`, and the
    /// matching cancellation-free magnitudes.
    pub fn conditionals(&self, degree: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let (v, mag) = conditionals_with_magnitude(&self.x, &self.decomp, degree)?;
        let d = self.det_t;
        Ok((v.iter().map(|x| d * x).collect(), mag.iter().map(|x| d.abs() * x).collect()))
    }

    /// `p|_T(X_0)` with `p = c_n^{|T| + degree}`.
    pub fn conditioned_value(&self, degree: usize) -> Result<f64> {
        Ok(self.det_t * char_coeff_from_decomp(&self.decomp, degree)?)
    }

    pub fn pivot_ok(&self, j: usize) -> bool {
        let p = self.x.get(j, j);
        p != 0.0 && p.abs() > TOL_PIVOT * self.max_abs
    }

    /// Eliminate index `j`: Schur complement, rank-one eigen update and pivot bookkeeping.
    pub fn condition_on(&mut self, j: usize) -> Result<()> {
        let pivot = self.x.get(j, j);
        let next = schur_complement(&self.x, j)?;
        let col = self.x.column(j);
        self.decomp = update_diagonalization(&self.decomp, -1.0 / pivot, &col)?;
        self.det_t *= pivot;
        self.max_abs = next.max_abs();
        self.x = next;
        Ok(())
    }
}

/// The characteristic method for `p = c_n^k` with `ell` interpolation nodes.
pub fn characteristic_method(a0: &SymMatrix, a1: &SymMatrix, k: usize, ell: usize) -> Result<GreedyTrace> {
    check_instance(a0, a1, k)?;
    if ell < k + 1 {
        return Err(Error::invalid(format!("{ell} nodes cannot determine a degree-{k} polynomial")));
    }
    let nodes = default_nodes(a0, a1, ell)?;
    let states = nodes
        .par_iter()
        .map(|&t| EvalMatrixState::from_matrix(SymMatrix::pencil(a1, t, a0)))
        .collect::<Result<Vec<_>>>()?;
    characteristic_method_from_states(a0, a1, k, nodes, states)
}

/// The characteristic method from prepared node states (one per node).
///
/// Lets callers that share structure across nodes, such as a common
/// eigenbasis, skip the initial diagonalizations.
pub fn characteristic_method_from_states(
    a0: &SymMatrix,
    a1: &SymMatrix,
    k: usize,
    nodes: Vec<f64>,
    mut states: Vec<EvalMatrixState>,
) -> Result<GreedyTrace> {
    let n = a0.n();
    if states.len() != nodes.len() || nodes.len() < k + 1 {
        return Err(Error::invalid("need one state per node and at least k + 1 nodes"));
    }
    let root_values = states
        .iter()
        .map(|s| s.conditioned_value(k))
        .collect::<Result<Vec<_>>>()?;
    let eta_root = eta_of(&UnivariatePoly::interpolate(&nodes, &root_values)?.truncate(k)).eta;

    let mut support = SupportSet::empty();
    let mut rounds = Vec::with_capacity(k);
    for r in 0..k {
        let degree = k - r;
        let tables = states
            .par_iter()
            .map(|s| s.conditionals(degree))
            .collect::<Result<Vec<_>>>()?;
        let scores = (0..n)
            .into_par_iter()
            .map(|j| {
                if support.contains(j) || !states.iter().all(|s| s.pivot_ok(j)) {
                    return Ok(None);
                }
                let values: Vec<f64> = tables.iter().map(|(v, _)| v[j]).collect();
                if tables.iter().all(|(v, m)| v[j].abs() <= ZERO_POLY_TOL * m[j]) {
                    return Ok(None);
                }
                let g = UnivariatePoly::interpolate(&nodes, &values)?.truncate(k);
                let e = eta_of(&g);
                Ok((!e.zero_polynomial).then_some(e.eta))
            })
            .collect::<Result<Vec<_>>>()?;
        let round = finish_round(n, &support, scores)?;
        let j = round.chosen;
        states.par_iter_mut().try_for_each(|s| s.condition_on(j))?;
        support = support.with(j);
        rounds.push(round);
    }
    let value = inner_qcqp_solve(a0, a1, &support)?.0;
    Ok(GreedyTrace {
        rounds,
        support,
        value,
        eta_root,
        nodes,
    })
}

/// Constants of the a-priori bound `OPT <= c1 * eta_p + c2` for `p = c_n^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub c1: f64,
    pub c2: f64,
    pub upper: f64,
}

/// `c1 = 1 + (n-k) tr(A1) / (lambda_min(A1) n (k-1))`,
/// `c2 = -(n-k) tr(A0) / (lambda_min(A1) n (k-1))`.
///
/// The bound follows from `X = A1 eta_p - A0` lying in the hyperbolicity
/// cone of `c_n^k`, where `X + (n-k) tr(X) / (n (k-1)) I` is PSD; expanding
/// `tr(X) = eta_p tr(A1) - tr(A0)` gives the minus sign on `c2`.
pub fn approx_bound_certificate(a0: &SymMatrix, a1: &SymMatrix, k: usize, eta_p: f64) -> Result<BoundCertificate> {
    let n = check_instance(a0, a1, k)?;
    if k < 2 {
        return Err(Error::UndefinedBound(format!("k = {k}: the bound divides by k - 1")));
    }
    let lmin = eigenvalues(a1)[0];
    let denom = lmin * n as f64 * (k - 1) as f64;
    let gap = (n - k) as f64;
    let c1 = 1.0 + gap * a1.trace() / denom;
    let c2 = -gap * a0.trace() / denom;
    Ok(BoundCertificate {
        c1,
        c2,
        upper: c1 * eta_p + c2,
    })
}

/// Does every support of `p` attain the same fixed-support value, equal to `eta_p`?
pub fn exactness_check<P: LpmOracle + ?Sized>(p: &P, a0: &SymMatrix, a1: &SymMatrix) -> Result<bool> {
    let eta = crate::lpm::eta(p, &SupportSet::empty(), a0, a1)?.eta;
    if !eta.is_finite() {
        return Ok(false);
    }
    let tol = 1e-7 * eta.abs().max(1.0);
    for s in p.support().enumerate(&OracleBudget::default())? {
        let (v, _) = inner_qcqp_solve(a0, a1, &s)?;
        if (v - eta).abs() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}
