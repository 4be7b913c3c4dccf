use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use super::{RegressionInstance, SolveReport};
use crate::charpoly::char_coeff_from_decomp;
use crate::linalg::{update_diagonalization, SupportSet, SymMatrix};
use crate::lpm::{conditional_eval, evaluation_scale, LpmOracle, ZERO_POLY_TOL};
use crate::solver::{select, EvalMatrixState};
use crate::verify::subsets;
use crate::{Error, Result};

/// Largest `n` accepted by the exact volume-sampling enumeration.
pub const VOLUME_SAMPLING_MAX_N: usize = 20;

fn columns(a: &DMatrix<f64>, s: &SupportSet) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), s.len(), |i, c| a[(i, s.as_slice()[c])])
}

/// Least squares on the columns in `s`: `(coefficients, ||A_S x - b||^2)`.
pub fn least_squares_on(a: &DMatrix<f64>, b: &DVector<f64>, s: &SupportSet) -> Result<(DVector<f64>, f64)> {
    if s.is_empty() {
        return Ok((DVector::zeros(0), b.norm_squared()));
    }
    let sub = columns(a, s);
    let x = sub
        .clone()
        .svd(true, true)
        .solve(b, 1e-12)
        .map_err(|e| Error::Numerical(format!("least squares failed: {e}")))?;
    let loss = (sub * &x - b).norm_squared();
    Ok((x, loss))
}

/// `||P_{A_S} b||^2`, the squared norm of the projection of `b` onto the span of `A_S`.
pub fn projection_gain(a: &DMatrix<f64>, b: &DVector<f64>, s: &SupportSet) -> Result<f64> {
    let (_, loss) = least_squares_on(a, b, s)?;
    Ok(b.norm_squared() - loss)
}

/// Closed form `p|_T(A'(I + bb')A) / p|_T(A'A) - 1`.
pub fn sparse_regression_eta<P: LpmOracle + ?Sized>(
    p: &P,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    t: &SupportSet,
) -> Result<f64> {
    if a.nrows() != b.len() || a.ncols() != p.dim() {
        return Err(Error::invalid("design, response and oracle dimensions disagree"));
    }
    let m1 = SymMatrix::gram(a)?;
    let m2 = m1.rank_one_update(1.0, &a.tr_mul(b));
    let degenerate = |e: Error| match e {
        Error::SingularConditioning { support } => {
            Error::DegenerateDesign(format!("A'A restricted to {support:?} is singular"))
        }
        other => other,
    };
    let den = conditional_eval(p, t, &m1).map_err(degenerate)?;
    if den.abs() <= ZERO_POLY_TOL * evaluation_scale(p, std::slice::from_ref(&m1))? {
        return Err(Error::DegenerateDesign(format!(
            "conditional polynomial vanishes on A'A for T = {:?}",
            t.as_slice()
        )));
    }
    let num = conditional_eval(p, t, &m2).map_err(degenerate)?;
    Ok(num / den - 1.0)
}

/// Greedy sparse regression by the characteristic method with two tracked matrices.
///
/// The matrices `A'A` and `A'A + (A'b)(A'b)'` are Schur-complemented together;
/// each candidate's score is the ratio of their conditionals, so no
/// interpolation or root finding is needed.
pub fn sparse_regression_solve(a: &DMatrix<f64>, b: &DVector<f64>, k: usize) -> Result<SolveReport> {
    let start = Instant::now();
    let inst = RegressionInstance::new(a.clone(), b.clone(), k)?;
    let n = a.ncols();
    if b.norm_squared() == 0.0 {
        return Ok(SolveReport {
            support: SupportSet::prefix(k),
            value: 0.0,
            loss: Some(0.0),
            coefficients: vec![0.0; k],
            eta_trace: vec![0.0; k],
            eta_root: 0.0,
            elapsed_secs: start.elapsed().as_secs_f64(),
            bound: None,
        });
    }
    let m1 = inst.gram();
    let c = inst.correlation();
    let mut plain = EvalMatrixState::from_matrix(m1.clone())?;
    let shifted_decomp = update_diagonalization(&plain.decomp, 1.0, &c)?;
    let mut shifted = EvalMatrixState::from_decomposition(m1.rank_one_update(1.0, &c), shifted_decomp);

    let root_den = char_coeff_from_decomp(&plain.decomp, k)?;
    let eta_root = char_coeff_from_decomp(&shifted.decomp, k)? / root_den - 1.0;

    let mut support = SupportSet::empty();
    let mut eta_trace = Vec::with_capacity(k);
    for r in 0..k {
        let degree = k - r;
        let (v1, mag1) = plain.conditionals(degree)?;
        let (v2, _) = shifted.conditionals(degree)?;
        let scores: Vec<Option<f64>> = (0..n)
            .map(|j| {
                if support.contains(j) || !plain.pivot_ok(j) || !shifted.pivot_ok(j) {
                    return None;
                }
                if v1[j].abs() <= ZERO_POLY_TOL * mag1[j] || v1[j] == 0.0 {
                    return None;
                }
                Some(v2[j] / v1[j] - 1.0)
            })
            .collect();
        let j = select(&scores).ok_or_else(|| Error::ExhaustedSupport {
            partial: support.as_slice().to_vec(),
        })?;
        eta_trace.push(scores[j].unwrap_or(f64::NEG_INFINITY));
        plain.condition_on(j)?;
        shifted.condition_on(j)?;
        support = support.with(j);
    }
    let (x, loss) = least_squares_on(a, b, &support)?;
    Ok(SolveReport {
        value: b.norm_squared() - loss,
        support,
        loss: Some(loss),
        coefficients: x.iter().copied().collect(),
        eta_trace,
        eta_root,
        elapsed_secs: start.elapsed().as_secs_f64(),
        bound: None,
    })
}

/// `E[gain(A_S, b) | T ⊆ S]` with `Pr(S)` proportional to `det(A'A|_S)`, by enumeration.
pub fn volume_sampling_expectation(a: &DMatrix<f64>, b: &DVector<f64>, t: &SupportSet, k: usize) -> Result<f64> {
    let n = a.ncols();
    if a.nrows() != b.len() {
        return Err(Error::invalid("design and response lengths disagree"));
    }
    if n > VOLUME_SAMPLING_MAX_N {
        return Err(Error::BudgetExceeded(format!("n = {n} exceeds {VOLUME_SAMPLING_MAX_N}")));
    }
    if k == 0 || k > n || t.len() > k || t.iter().any(|i| i >= n) {
        return Err(Error::invalid("need |T| <= k <= n and T inside [n]"));
    }
    let gram = SymMatrix::gram(a)?;
    let rest = t.complement(n);
    let mut total_weight = 0.0;
    let mut weighted = 0.0;
    let mut max_weight = 0.0f64;
    for extra in subsets(rest.len(), k - t.len()) {
        let mut idx: Vec<usize> = t.as_slice().to_vec();
        idx.extend(extra.iter().map(|e| rest.as_slice()[e]));
        let s = SupportSet::new(idx, n)?;
        let w = gram.minor(&s);
        max_weight = max_weight.max(w.abs());
        if w <= 0.0 {
            continue;
        }
        total_weight += w;
        weighted += w * projection_gain(a, b, &s)?;
    }
    if total_weight <= ZERO_POLY_TOL * max_weight || total_weight == 0.0 {
        return Err(Error::DegenerateDesign(format!(
            "no k-subset containing {:?} has positive volume",
            t.as_slice()
        )));
    }
    Ok(weighted / total_weight)
}

/// Orthogonal matching pursuit with column and residual deflation.
pub fn omp_baseline(a: &DMatrix<f64>, b: &DVector<f64>, k: usize) -> Result<SolveReport> {
    let start = Instant::now();
    RegressionInstance::new(a.clone(), b.clone(), k)?;
    let n = a.ncols();
    let mut cols = a.clone();
    let mut resid = b.clone();
    let floor = 1e-12 * (0..n).map(|j| a.column(j).norm_squared()).fold(0.0, f64::max);
    let mut support = SupportSet::empty();
    let mut eta_trace = Vec::with_capacity(k);
    for _ in 0..k {
        let scores: Vec<Option<f64>> = (0..n)
            .map(|j| {
                let nrm = cols.column(j).norm_squared();
                if support.contains(j) || nrm <= floor {
                    return None;
                }
                let d = cols.column(j).dot(&resid);
                Some(d * d / nrm)
            })
            .collect();
        let j = select(&scores).ok_or_else(|| Error::ExhaustedSupport {
            partial: support.as_slice().to_vec(),
        })?;
        let q = cols.column(j) / cols.column(j).norm();
        resid -= &q * q.dot(&resid);
        for mut col in cols.column_iter_mut() {
            let proj = q.dot(&col);
            col.axpy(-proj, &q, 1.0);
        }
        support = support.with(j);
        eta_trace.push(b.norm_squared() - resid.norm_squared());
    }
    let (x, loss) = least_squares_on(a, b, &support)?;
    Ok(SolveReport {
        value: b.norm_squared() - loss,
        support,
        loss: Some(loss),
        coefficients: x.iter().copied().collect(),
        eta_trace,
        eta_root: 0.0,
        elapsed_secs: start.elapsed().as_secs_f64(),
        bound: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lpm::{eta, CharCoeffOracle};
    use crate::verify::random::{random_gaussian, random_regression, random_vector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exhaustive_min_loss(a: &DMatrix<f64>, b: &DVector<f64>, k: usize) -> f64 {
        subsets(a.ncols(), k)
            .map(|s| least_squares_on(a, b, &s).unwrap().1)
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn closed_form_examples() {
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![1.0, 0.0]);
        let p = CharCoeffOracle::new(2, 1).unwrap();
        assert!((sparse_regression_eta(&p, &a, &b, &SupportSet::empty()).unwrap() - 0.5).abs() < 1e-12);
        let t0 = SupportSet::new(vec![0], 2).unwrap();
        assert!((sparse_regression_eta(&p, &a, &b, &t0).unwrap() - 1.0).abs() < 1e-12);
        let zero = DVector::zeros(2);
        for k in 1..=2 {
            let p = CharCoeffOracle::new(2, k).unwrap();
            assert_eq!(sparse_regression_eta(&p, &a, &zero, &SupportSet::empty()).unwrap(), 0.0);
        }
    }

    #[test]
    fn closed_form_rejects_singular_design() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let b = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let p = CharCoeffOracle::new(2, 2).unwrap();
        assert!(matches!(
            sparse_regression_eta(&p, &a, &b, &SupportSet::empty()),
            Err(Error::DegenerateDesign(_))
        ));
    }

    #[test]
    fn closed_form_matches_root_finding() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let n = rng.random_range(2..=8);
            let m = n + rng.random_range(2..10);
            let k = rng.random_range(1..=n);
            let (a, b) = random_regression(&mut rng, m, n, 2);
            let inst = RegressionInstance::new(a.clone(), b.clone(), k).unwrap();
            let (a0, a1) = inst.as_qcqp();
            let p = CharCoeffOracle::new(n, k).unwrap();
            let closed = sparse_regression_eta(&p, &a, &b, &SupportSet::empty()).unwrap();
            let rooted = eta(&p, &SupportSet::empty(), &a0, &a1).unwrap().eta;
            assert!((closed - rooted).abs() <= 1e-7 * closed.abs().max(1.0), "{closed} vs {rooted}");
        }
    }

    #[test]
    fn volume_sampling_examples() {
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![1.0, 0.0]);
        let e = volume_sampling_expectation(&a, &b, &SupportSet::empty(), 1).unwrap();
        assert!((e - 0.5).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = random_gaussian(&mut rng, 8, 5);
        let b = random_vector(&mut rng, 8);
        let s0 = SupportSet::new(vec![1, 4], 5).unwrap();
        let pinned = volume_sampling_expectation(&a, &b, &s0, 2).unwrap();
        assert!((pinned - projection_gain(&a, &b, &s0).unwrap()).abs() < 1e-10);

        let t = SupportSet::new(vec![1], 5).unwrap();
        let p = CharCoeffOracle::new(5, 2).unwrap();
        let e = volume_sampling_expectation(&a, &b, &t, 2).unwrap();
        let closed = sparse_regression_eta(&p, &a, &b, &t).unwrap();
        assert!((e - closed).abs() < 1e-8 * closed.abs().max(1.0));
    }

    #[test]
    fn orthonormal_design_picks_largest_responses() {
        let n = 6;
        let a = DMatrix::identity(n, n);
        let b = DVector::from_vec(vec![0.5, -3.0, 1.0, 2.0, -0.1, 0.7]);
        for k in 1..=n {
            let r = sparse_regression_solve(&a, &b, k).unwrap();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| b[j].abs().total_cmp(&b[i].abs()));
            let want = SupportSet::new(order[..k].to_vec(), n).unwrap();
            assert_eq!(r.support, want);
            let rest: f64 = order[k..].iter().map(|&i| b[i] * b[i]).sum();
            assert!((r.loss.unwrap() - rest).abs() < 1e-10);
            assert_eq!(omp_baseline(&a, &b, k).unwrap().support, want);
        }
    }

    #[test]
    fn exact_representation_reaches_zero_loss() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_gaussian(&mut rng, 20, 6);
        let b = a.column(3).into_owned() * 2.5;
        let r = sparse_regression_solve(&a, &b, 1).unwrap();
        assert_eq!(r.support.as_slice(), &[3]);
        assert!(r.loss.unwrap() < 1e-18 * b.norm_squared().max(1.0) + 1e-20);
        let o = omp_baseline(&a, &b, 1).unwrap();
        assert_eq!(o.support.as_slice(), &[3]);
        assert!(o.loss.unwrap() < 1e-18 * b.norm_squared().max(1.0) + 1e-20);
    }

    #[test]
    fn zero_response_short_circuits() {
        let a = DMatrix::identity(4, 4);
        let r = sparse_regression_solve(&a, &DVector::zeros(4), 2).unwrap();
        assert_eq!(r.support.as_slice(), &[0, 1]);
        assert_eq!(r.loss, Some(0.0));
    }

    #[test]
    fn greedy_regression_respects_exhaustive_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(30);
        let (a, b) = random_regression(&mut rng, 30, 12, 3);
        let r = sparse_regression_solve(&a, &b, 3).unwrap();
        assert!(r.loss.unwrap() >= exhaustive_min_loss(&a, &b, 3) - 1e-9);
        assert!(r.eta_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert!(r.eta_root <= r.eta_trace[0] + 1e-9);
        // The final score is the projection gain of the chosen support.
        assert!((r.eta_trace[2] - r.value).abs() <= 1e-8 * r.value.max(1.0));
    }

    #[test]
    fn omp_sandwich_and_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let (a, b) = random_regression(&mut rng, 40, 15, 4);
        let mut prev = f64::INFINITY;
        for k in 1..=6 {
            let r = omp_baseline(&a, &b, k).unwrap();
            let loss = r.loss.unwrap();
            assert!(loss <= b.norm_squared() + 1e-9);
            assert!(loss <= prev + 1e-9);
            if k <= 4 {
                assert!(loss >= exhaustive_min_loss(&a, &b, k) - 1e-9);
            }
            prev = loss;
        }
    }

    #[test]
    fn full_support_equals_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (a, b) = random_regression(&mut rng, 25, 7, 2);
        let r = sparse_regression_solve(&a, &b, 7).unwrap();
        let (_, full) = least_squares_on(&a, &b, &SupportSet::full(7)).unwrap();
        assert!((r.loss.unwrap() - full).abs() < 1e-9 * full.max(1.0));
    }

    #[test]
    fn rank_deficient_design_reports_partial_support() {
        let a = DMatrix::from_row_slice(4, 3, &[1.0, 2.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0]);
        let b = DVector::from_vec(vec![1.0, 2.0, 0.5, 0.0]);
        // rank(A) = 1, so no 2-subset has positive volume and every first pick is degenerate.
        match sparse_regression_solve(&a, &b, 2) {
            Err(Error::ExhaustedSupport { partial }) => assert!(partial.is_empty()),
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }
}
