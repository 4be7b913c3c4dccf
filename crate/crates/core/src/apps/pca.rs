use std::time::Instant;

use super::SolveReport;
use crate::linalg::{diagonalize, SymMatrix};
use crate::lpm::chebyshev_nodes_on_bracket;
use crate::solver::{characteristic_method_from_states, EvalMatrixState};
use crate::{Error, Result};

/// Greedy sparse PCA: the characteristic method on `(A0, A1) = (A, I)`.
///
/// Every node matrix `t_i I - A` shares the eigenbasis of `A`, so one
/// diagonalization seeds all nodes. Nodes are Chebyshev points on the
/// spectrum of `A` widened by a tenth of its spread on each side.
pub fn sparse_pca_solve(a: &SymMatrix, k: usize) -> Result<SolveReport> {
    sparse_pca_solve_with_nodes(a, k, k + 1)
}

/// [`sparse_pca_solve`] with `ell >= k + 1` interpolation nodes.
pub fn sparse_pca_solve_with_nodes(a: &SymMatrix, k: usize, ell: usize) -> Result<SolveReport> {
    let start = Instant::now();
    let n = a.n();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must be in 1..={n}")));
    }
    if ell < k + 1 {
        return Err(Error::invalid(format!("{ell} nodes cannot determine a degree-{k} polynomial")));
    }
    let base = diagonalize(a)?;
    let nodes = chebyshev_nodes_on_bracket(base.lambda_min(), base.lambda_max(), ell);
    let identity = SymMatrix::identity(n);
    let states = nodes
        .iter()
        .map(|&t| EvalMatrixState::from_decomposition(SymMatrix::pencil(&identity, t, a), base.shifted(t, -1.0)))
        .collect();
    let trace = characteristic_method_from_states(a, &identity, k, nodes, states)?;
    Ok(SolveReport {
        eta_trace: trace.etas(),
        eta_root: trace.eta_root,
        value: trace.value,
        support: trace.support,
        loss: None,
        coefficients: Vec::new(),
        elapsed_secs: start.elapsed().as_secs_f64(),
        bound: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::datasets::pitprops;
    use crate::linalg::{eigenvalues, inner_qcqp_solve, SupportSet};
    use crate::lpm::{eta, CharCoeffOracle};
    use crate::solver::characteristic_method;
    use crate::verify::random::random_symmetric;
    use crate::verify::{brute_force_qcqp, OracleBudget};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_example() {
        let r = sparse_pca_solve(&SymMatrix::from_diagonal(&[5.0, 3.0, 1.0]), 2).unwrap();
        assert_eq!(r.support.as_slice(), &[0, 1]);
        assert!((r.value - 5.0).abs() < 1e-10);
        let root = 3.0 + 2.0 * 3f64.sqrt() / 3.0;
        assert!((r.eta_root - root).abs() < 1e-9);
        assert!(r.eta_root >= 3.0 && r.eta_root <= 5.0);
    }

    #[test]
    fn isotropic_matrix() {
        for k in 1..=4 {
            let r = sparse_pca_solve(&SymMatrix::identity(4), k).unwrap();
            assert!((r.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shared_basis_matches_generic_characteristic_method() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let n = rng.random_range(2..=9);
            let k = rng.random_range(1..=n);
            let a = random_symmetric(&mut rng, n);
            let shared = sparse_pca_solve(&a, k).unwrap();
            let generic = characteristic_method(&a, &SymMatrix::identity(n), k, k + 1).unwrap();
            assert_eq!(shared.support, generic.support);
        }
    }

    #[test]
    fn interlacing_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..30 {
            let n = rng.random_range(2..=8);
            let k = rng.random_range(1..=n.min(4));
            let a = random_symmetric(&mut rng, n);
            let id = SymMatrix::identity(n);
            let ev = eigenvalues(&a);
            let e = eta(&CharCoeffOracle::new(n, k).unwrap(), &SupportSet::empty(), &a, &id).unwrap().eta;
            let r = sparse_pca_solve(&a, k).unwrap();
            let (opt, _) = brute_force_qcqp(&a, &id, k, &OracleBudget::default()).unwrap();
            // k-th smallest eigenvalue.
            assert!(ev[k - 1] <= e + 1e-7);
            assert!(e <= r.value + 1e-7);
            assert!(r.value <= opt + 1e-7);
        }
    }

    #[test]
    fn full_support_gives_top_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random_symmetric(&mut rng, 7);
        let r = sparse_pca_solve(&a, 7).unwrap();
        assert!((r.value - eigenvalues(&a)[6]).abs() < 1e-10);
    }

    #[test]
    fn pitprops_values() {
        let c = pitprops();
        let r5 = sparse_pca_solve(&c, 5).unwrap();
        assert!((r5.value - 3.40).abs() < 0.05, "{}", r5.value);
        let (v, _) = inner_qcqp_solve(&c, &SymMatrix::identity(13), &r5.support).unwrap();
        assert_eq!(v, r5.value);
    }
}
