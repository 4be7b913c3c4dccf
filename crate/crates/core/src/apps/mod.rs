//! Front ends for sparse regression and sparse PCA, plus the OMP baseline.

pub mod datasets;
mod pca;
mod regression;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use pca::{sparse_pca_solve, sparse_pca_solve_with_nodes};
pub use regression::{
    least_squares_on, omp_baseline, projection_gain, sparse_regression_eta, sparse_regression_solve,
    volume_sampling_expectation,
};

use crate::linalg::{SupportSet, SymMatrix};
use crate::solver::BoundCertificate;
use crate::{Error, Result};

/// `min ||A x - b||^2` subject to `|supp(x)| <= k`; rows of `A` are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionInstance {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub k: usize,
}

impl RegressionInstance {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, k: usize) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::invalid(format!("design has {} rows, response has {}", a.nrows(), b.len())));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("design and response must be finite"));
        }
        if k == 0 || k > a.ncols() {
            return Err(Error::invalid(format!("k = {k} must be in 1..={}", a.ncols())));
        }
        Ok(RegressionInstance { a, b, k })
    }

    pub fn gram(&self) -> SymMatrix {
        SymMatrix::gram(&self.a).expect("finite design")
    }

    /// `A' b`.
    pub fn correlation(&self) -> DVector<f64> {
        self.a.tr_mul(&self.b)
    }

    /// The equivalent QCQP `max x' (A'b b'A) x` s.t. `x' A'A x = 1`, as `(A0, A1)`.
    pub fn as_qcqp(&self) -> (SymMatrix, SymMatrix) {
        (SymMatrix::outer(&self.correlation()), self.gram())
    }
}

/// `max x' A x` subject to `||x|| = 1`, `|supp(x)| <= k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaInstance {
    pub a: SymMatrix,
    pub k: usize,
}

impl PcaInstance {
    pub fn new(a: SymMatrix, k: usize) -> Result<Self> {
        if k == 0 || k > a.n() {
            return Err(Error::invalid(format!("k = {k} must be in 1..={}", a.n())));
        }
        Ok(PcaInstance { a, k })
    }

    pub fn solve(&self) -> Result<SolveReport> {
        sparse_pca_solve(&self.a, self.k)
    }
}

/// Outcome of one application solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub support: SupportSet,
    /// Projection gain for regression, `lambda_max(A|_T)` for PCA.
    pub value: f64,
    /// Residual sum of squares, regression only.
    pub loss: Option<f64>,
    /// Least-squares coefficients on `support`, in support order.
    pub coefficients: Vec<f64>,
    /// Score of the chosen index in each round.
    pub eta_trace: Vec<f64>,
    /// Score of the empty support.
    pub eta_root: f64,
    pub elapsed_secs: f64,
    pub bound: Option<BoundCertificate>,
}
