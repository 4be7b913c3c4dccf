//! Sparse quadratically constrained quadratic programs with a single
//! constraint, solved by greedy conditioning of LPM polynomials.
//!
//! The problems handled here have the form
//!
//! ```text
//!     maximize     x' A0 x
//!     subject to   x' A1 x = 1
//!                  |supp(x)| <= k
//! ```
//!
//! with `A1` positive definite. An LPM polynomial is a nonnegative linear
//! combination of `k x k` principal minors; the largest real root of
//! `p(A1 t - A0)` is a lower bound on the optimum, and conditioning `p` on
//! one index at a time turns that bound into a feasible support.
//!
//! Layout:
//! - [`linalg`]: symmetric matrices, eigendecompositions and their rank-one
//!   updates, Schur complements, and the fixed-support inner solve.
//! - [`charpoly`]: elementary symmetric kernels behind the characteristic
//!   coefficients `c_n^k`.
//! - [`lpm`]: the oracle abstraction, conditional polynomials, univariate
//!   restriction and largest-root extraction.
//! - [`solver`]: the generic greedy heuristic and the fast characteristic
//!   method, plus bound certificates.
//! - [`apps`]: sparse regression, sparse PCA and the OMP baseline.
//! - [`verify`]: brute-force oracles and a randomized property suite.
//!
//! ```
//! use sqcqp_core::{apps, SymMatrix};
//!
//! let a = SymMatrix::from_diagonal(&[5.0, 3.0, 1.0]);
//! let report = apps::sparse_pca_solve(&a, 2).unwrap();
//! assert_eq!(report.support.as_slice(), &[0, 1]);
//! assert!((report.value - 5.0).abs() < 1e-9);
//! ```

pub mod apps;
pub mod charpoly;
mod error;
pub mod linalg;
pub mod lpm;
pub mod solver;
pub mod verify;

pub use apps::{PcaInstance, RegressionInstance, SolveReport};
pub use charpoly::{ElemSymTable, LeaveOneOutTable};
pub use error::{Error, Result};
pub use linalg::{EigenDecomposition, SupportSet, SymMatrix};
pub use lpm::{CharCoeffOracle, EtaResult, LpmOracle, Support, UnivariatePoly};
pub use solver::{EvalMatrixState, GreedyTrace, Round};
pub use verify::OracleBudget;
