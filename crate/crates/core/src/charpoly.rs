//! Characteristic coefficients `c_n^k(X) = e_k(lambda(X))` and the
//! elementary-symmetric kernels needed to condition them.

use nalgebra::DVector;

use crate::linalg::{diagonalize, EigenDecomposition, SymMatrix};
use crate::{Error, Result};

/// `e^0 .. e^k` of one vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ElemSymTable {
    pub values: Vec<f64>,
}

impl ElemSymTable {
    pub fn degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, j: usize) -> f64 {
        self.values[j]
    }
}

/// Row `i` holds `e^0 .. e^k` of `lambda` with entry `i` removed.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaveOneOutTable {
    pub rows: Vec<Vec<f64>>,
}

impl LeaveOneOutTable {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Column `j` across all rows, i.e. `(e^j(lambda_{-i}))_i`.
    pub fn column(&self, j: usize) -> DVector<f64> {
        DVector::from_iterator(self.rows.len(), self.rows.iter().map(|r| r[j]))
    }
}

/// Appends one variable to a running `e^0..e^k` table.
#[inline]
fn push_variable(e: &mut [f64], x: f64) {
    for j in (1..e.len()).rev() {
        e[j] += x * e[j - 1];
    }
}

fn fresh_table(k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    e
}

/// `C(n, k)` as a float; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Elementary symmetric polynomials `e^0..e^k` by the one-pass `O(kn)` recurrence.
pub fn elem_sym(lambda: &[f64], k: usize) -> Result<ElemSymTable> {
    if k > lambda.len() {
        return Err(Error::invalid(format!("degree {k} exceeds {} variables", lambda.len())));
    }
    let mut e = fresh_table(k);
    for &x in lambda {
        push_variable(&mut e, x);
    }
    Ok(ElemSymTable { values: e })
}

/// `c_n^k(X)`, the sum of all `k x k` principal minors.
pub fn char_coeff(x: &SymMatrix, k: usize) -> Result<f64> {
    if k > x.n() {
        return Err(Error::invalid(format!("degree {k} exceeds dimension {}", x.n())));
    }
    if k == 0 {
        return Ok(1.0);
    }
    char_coeff_from_decomp(&diagonalize(x)?, k)
}

pub fn char_coeff_from_decomp(decomp: &EigenDecomposition, k: usize) -> Result<f64> {
    Ok(elem_sym(decomp.lambda.as_slice(), k)?.get(k))
}

/// Leave-one-out elementary symmetric tables in `O(kn log n)`.
///
/// The index set is split in halves recursively; the running table that
/// enters the left half has already absorbed every variable of the right
/// half and vice versa, so each leaf sees all variables but its own. No
/// division is used.
pub fn leave_one_out(lambda: &[f64], k: usize) -> Result<LeaveOneOutTable> {
    let n = lambda.len();
    if n < 2 {
        return Err(Error::invalid("leave-one-out needs at least two variables"));
    }
    if k > n - 1 {
        return Err(Error::invalid(format!("degree {k} exceeds {} remaining variables", n - 1)));
    }
    let mut rows = vec![Vec::new(); n];
    let indices: Vec<usize> = (0..n).collect();
    descend(lambda, &indices, fresh_table(k), &mut rows);
    Ok(LeaveOneOutTable { rows })
}

fn descend(lambda: &[f64], set: &[usize], prefix: Vec<f64>, rows: &mut [Vec<f64>]) {
    if set.len() == 1 {
        rows[set[0]] = prefix;
        return;
    }
    let (left, right) = set.split_at(set.len().div_ceil(2));
    let mut into_left = prefix.clone();
    for &i in right {
        push_variable(&mut into_left, lambda[i]);
    }
    let mut into_right = prefix;
    for &i in left {
        push_variable(&mut into_right, lambda[i]);
    }
    descend(lambda, left, into_left, rows);
    descend(lambda, right, into_right, rows);
}

/// Naive `O(kn^2)` leave-one-out: recomputes each row from scratch.
pub fn leave_one_out_naive(lambda: &[f64], k: usize) -> Result<LeaveOneOutTable> {
    let n = lambda.len();
    if n < 2 || k > n - 1 {
        return Err(Error::invalid("invalid leave-one-out dimensions"));
    }
    let rows = (0..n)
        .map(|i| {
            let mut e = fresh_table(k);
            for (j, &x) in lambda.iter().enumerate() {
                if j != i {
                    push_variable(&mut e, x);
                }
            }
            e
        })
        .collect();
    Ok(LeaveOneOutTable { rows })
}

/// Diagonal of the gradient of `c_n^k` at `diag(lambda)`: `e^{k-1}(lambda_{-i})`.
pub fn grad_char_diag(lambda: &[f64], k: usize) -> Result<DVector<f64>> {
    let n = lambda.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("gradient degree {k} must be in 1..={n}")));
    }
    if n == 1 {
        return Ok(DVector::from_element(1, 1.0));
    }
    Ok(leave_one_out(lambda, k - 1)?.column(k - 1))
}

/// The vector `v_i = c_n^k|_{i}(X)` for every `i` at once.
///
/// Uses `v = c^{k-1}(Lambda) diag(X) - (Q∘Q) (lambda^2 ∘ grad c^{k-1}(Lambda))`,
/// which costs one matrix-vector product after the leave-one-out pass.
pub fn conditionals_vector(x: &SymMatrix, decomp: &EigenDecomposition, k: usize) -> Result<DVector<f64>> {
    Ok(conditionals_impl(x, decomp, k, false)?.0)
}

/// [`conditionals_vector`] together with the same formula evaluated on
/// absolute values, `|X_ii| e^{k-1}(|lambda|) + (Q∘Q)(lambda^2 ∘ grad c^{k-1}(|lambda|))`.
///
/// The second vector bounds the terms that cancel in `v`, so `|v_i|` far
/// below it means `v_i` is zero up to rounding.
pub fn conditionals_with_magnitude(
    x: &SymMatrix,
    decomp: &EigenDecomposition,
    k: usize,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let (v, mag) = conditionals_impl(x, decomp, k, true)?;
    Ok((v, mag.expect("requested")))
}

fn conditionals_impl(
    x: &SymMatrix,
    decomp: &EigenDecomposition,
    k: usize,
    with_magnitude: bool,
) -> Result<(DVector<f64>, Option<DVector<f64>>)> {
    let n = x.n();
    if decomp.n() != n {
        return Err(Error::invalid("decomposition does not match matrix dimension"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("conditional degree {k} must be in 1..={n}")));
    }
    let diag = x.diagonal();
    if k == 1 {
        let mag = with_magnitude.then(|| diag.abs());
        return Ok((diag, mag));
    }
    let lambda = decomp.lambda.as_slice();
    let q = &decomp.q;
    let weigh = |lam: &[f64]| -> Result<(f64, DVector<f64>)> {
        let lower = elem_sym(lam, k - 1)?.get(k - 1);
        let grad = grad_char_diag(lam, k - 1)?;
        Ok((lower, DVector::from_fn(n, |m, _| lambda[m] * lambda[m] * grad[m])))
    };
    let (lower, weights) = weigh(lambda)?;
    let abs_terms = if with_magnitude {
        let abs: Vec<f64> = lambda.iter().map(|l| l.abs()).collect();
        Some(weigh(&abs)?)
    } else {
        None
    };
    let mut v = DVector::zeros(n);
    let mut mag = abs_terms.as_ref().map(|_| DVector::zeros(n));
    for i in 0..n {
        let mut acc = 0.0;
        let mut acc_abs = 0.0;
        for m in 0..n {
            let q2 = q[(i, m)] * q[(i, m)];
            acc += q2 * weights[m];
            if let Some((_, w_abs)) = &abs_terms {
                acc_abs += q2 * w_abs[m];
            }
        }
        v[i] = lower * diag[i] - acc;
        if let (Some(mag), Some((lower_abs, _))) = (mag.as_mut(), &abs_terms) {
            mag[i] = lower_abs * diag[i].abs() + acc_abs;
        }
    }
    Ok((v, mag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SupportSet;
    use crate::verify::random::{random_orthogonal, random_symmetric};
    use crate::verify::subsets;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_elem_sym(lambda: &[f64], k: usize) -> f64 {
        subsets(lambda.len(), k)
            .map(|s| s.iter().map(|i| lambda[i]).product::<f64>())
            .sum()
    }

    #[test]
    fn elem_sym_examples() {
        assert_eq!(elem_sym(&[1.0, 1.0, 1.0], 2).unwrap().values, vec![1.0, 3.0, 3.0]);
        assert_eq!(elem_sym(&[1.0, 2.0, 3.0], 3).unwrap().values, vec![1.0, 6.0, 11.0, 6.0]);
        assert_eq!(elem_sym(&[0.0, 0.0, 5.0], 2).unwrap().values, vec![1.0, 5.0, 0.0]);
        assert!(elem_sym(&[1.0], 2).is_err());
    }

    #[test]
    fn elem_sym_matches_subset_enumeration() {
        let lambda = [1.0, 2.0, 3.0];
        for k in 0..=3 {
            assert_eq!(elem_sym(&lambda, k).unwrap().get(k), brute_elem_sym(&lambda, k));
        }
    }

    #[test]
    fn char_coeff_examples() {
        let d = SymMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        assert!((char_coeff(&d, 1).unwrap() - 6.0).abs() < 1e-13);
        assert!((char_coeff(&SymMatrix::identity(5), 2).unwrap() - 10.0).abs() < 1e-12);
        let x = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert!((char_coeff(&x, 2).unwrap() - 3.0).abs() < 1e-13);
        assert_eq!(char_coeff(&x, 0).unwrap(), 1.0);
        assert!(char_coeff(&x, 3).is_err());
    }

    #[test]
    fn char_coeff_is_sum_of_principal_minors() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x = random_symmetric(&mut rng, 7);
        for k in 1..=7 {
            let minors: f64 = subsets(7, k).map(|s| x.minor(&s)).sum();
            let c = char_coeff(&x, k).unwrap();
            assert!((c - minors).abs() <= 1e-9 * (1.0 + minors.abs()), "k={k}: {c} vs {minors}");
        }
    }

    #[test]
    fn leave_one_out_examples() {
        let t = leave_one_out(&[1.0, 2.0], 1).unwrap();
        assert_eq!(t.rows, vec![vec![1.0, 2.0], vec![1.0, 1.0]]);
        let t = leave_one_out(&[1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(t.row(0), &[1.0, 5.0, 6.0]);
        assert!(leave_one_out(&[1.0], 0).is_err());
        assert!(leave_one_out(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn leave_one_out_matches_naive_at_seventeen() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let lambda: Vec<f64> = crate::verify::random::random_vector(&mut rng, 17).iter().copied().collect();
        let abs: Vec<f64> = lambda.iter().map(|x| x.abs()).collect();
        let fast = leave_one_out(&lambda, 5).unwrap();
        let slow = leave_one_out_naive(&lambda, 5).unwrap();
        let scale = leave_one_out_naive(&abs, 5).unwrap();
        for i in 0..17 {
            for j in 0..=5 {
                let err = (fast.rows[i][j] - slow.rows[i][j]).abs();
                assert!(err <= 1e-10 * scale.rows[i][j].max(f64::MIN_POSITIVE), "row {i} col {j}");
            }
        }
    }

    #[test]
    fn grad_examples() {
        assert_eq!(grad_char_diag(&[1.0, 1.0], 1).unwrap().as_slice(), &[1.0, 1.0]);
        assert_eq!(grad_char_diag(&[1.0, 2.0, 3.0], 2).unwrap().as_slice(), &[5.0, 4.0, 3.0]);
        let z = grad_char_diag(&[0.0; 5], 3).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
        assert!(grad_char_diag(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn grad_matches_finite_differences() {
        let lambda = [0.3, -1.2, 2.0, 0.7];
        let k = 3;
        let g = grad_char_diag(&lambda, k).unwrap();
        let h = 1e-6;
        for i in 0..4 {
            let mut up = lambda;
            let mut dn = lambda;
            up[i] += h;
            dn[i] -= h;
            let fd = (elem_sym(&up, k).unwrap().get(k) - elem_sym(&dn, k).unwrap().get(k)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn conditionals_examples() {
        let x = SymMatrix::from_diagonal(&[2.0, 3.0]);
        let d = diagonalize(&x).unwrap();
        assert_eq!(conditionals_vector(&x, &d, 1).unwrap().as_slice(), &[2.0, 3.0]);
        let v = conditionals_vector(&x, &d, 2).unwrap();
        assert!((v[0] - 6.0).abs() < 1e-13 && (v[1] - 6.0).abs() < 1e-13);
    }

    #[test]
    fn conditionals_match_minor_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 9;
        let x = random_symmetric(&mut rng, n);
        let d = diagonalize(&x).unwrap();
        let k = 3;
        let v = conditionals_vector(&x, &d, k).unwrap();
        for i in 0..n {
            let oracle: f64 = subsets(n, k).filter(|s| s.contains(i)).map(|s| x.minor(&s)).sum();
            assert!((v[i] - oracle).abs() <= 1e-8 * oracle.abs().max(1.0), "i={i}: {} vs {oracle}", v[i]);
        }
    }

    #[test]
    fn derivative_identity_of_shifted_char_coeff() {
        // c_n^k(tI - X) = (d/dt)^{n-k} det(tI - X) / (n-k)!
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 7;
        let x = random_symmetric(&mut rng, n);
        let mu = crate::linalg::eigenvalues(&x);
        // det(tI - X) = sum_j (-1)^j e_j(mu) t^{n-j}; coefficients by ascending power.
        let e = elem_sym(mu.as_slice(), n).unwrap();
        let det_coeffs: Vec<f64> = (0..=n).map(|p| if (n - p) % 2 == 0 { 1.0 } else { -1.0 } * e.get(n - p)).collect();
        for k in 1..=n {
            let m = n - k;
            let mut fact = 1.0;
            for i in 1..=m {
                fact *= i as f64;
            }
            let deriv: Vec<f64> = (m..=n)
                .map(|p| {
                    let mut falling = 1.0;
                    for i in 0..m {
                        falling *= (p - i) as f64;
                    }
                    det_coeffs[p] * falling / fact
                })
                .collect();
            // Leading coefficient pins the normalization: C(n, k).
            let mut binom = 1.0;
            for i in 0..k {
                binom = binom * (n - i) as f64 / (i + 1) as f64;
            }
            assert!((deriv[k] - binom).abs() < 1e-9);
            for t in [-2.0, -0.3, 0.5, 1.7, 3.0] {
                let lhs = char_coeff(&SymMatrix::pencil(&SymMatrix::identity(n), t, &x), k).unwrap();
                let rhs: f64 = deriv.iter().enumerate().map(|(p, c)| c * f64::powi(t, p as i32)).sum();
                assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + rhs.abs()), "k={k} t={t}");
            }
        }
    }

    #[test]
    fn rank_one_direction_is_affine() {
        // t -> c_n^k(Lambda + t B) for rank-one B is affine: check three-point collinearity.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 6;
        let x = random_symmetric(&mut rng, n);
        let b = crate::verify::random::random_vector(&mut rng, n);
        for k in 1..=n {
            let f = |t: f64| char_coeff(&x.rank_one_update(t, &b), k).unwrap();
            let (f0, f1, f2) = (f(0.0), f(1.0), f(2.0));
            let scale = f0.abs() + f1.abs() + f2.abs() + 1.0;
            assert!((f2 - 2.0 * f1 + f0).abs() <= 1e-9 * scale, "k={k}");
        }
    }

    #[test]
    fn empty_and_full_support_minors() {
        let x = SymMatrix::from_diagonal(&[2.0, 5.0]);
        assert_eq!(x.minor(&SupportSet::empty()), 1.0);
        assert!((x.minor(&SupportSet::full(2)) - 10.0).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn basis_invariance(seed in 0u64..1000, n in 2usize..8, k in 1usize..8) {
            prop_assume!(k <= n);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_symmetric(&mut rng, n);
            let u = random_orthogonal(&mut rng, n);
            let rotated = SymMatrix::new(&u * x.as_matrix() * u.transpose()).unwrap();
            let a = char_coeff(&x, k).unwrap();
            let b = char_coeff(&rotated, k).unwrap();
            let abs_scale = elem_sym(&crate::linalg::eigenvalues(&x).iter().map(|v| v.abs()).collect::<Vec<_>>(), k).unwrap().get(k);
            prop_assert!((a - b).abs() <= 1e-9 * abs_scale.max(1.0));
        }

        #[test]
        fn leave_one_out_recurrence(values in proptest::collection::vec(-3.0f64..3.0, 2..24), k in 0usize..6) {
            let n = values.len();
            prop_assume!(k < n);
            let full = elem_sym(&values, k).unwrap();
            let table = leave_one_out(&values, k).unwrap();
            let abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
            let scale = elem_sym(&abs, k).unwrap();
            for (i, &v) in values.iter().enumerate() {
                let row = table.row(i);
                prop_assert_eq!(row[0], 1.0);
                for j in 1..=k {
                    let rebuilt = v * row[j - 1] + row[j];
                    prop_assert!((rebuilt - full.get(j)).abs() <= 1e-11 * scale.get(j).max(1.0));
                }
            }
        }
    }

    #[allow(dead_code)]
    fn _type_check(_: DMatrix<f64>) {}
}
