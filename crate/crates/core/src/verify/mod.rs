//! Brute-force oracles used as ground truth by the test suites.

pub mod random;
pub mod suite;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::charpoly::binomial;
use crate::linalg::{inner_qcqp_solve, SupportSet, SymMatrix};
use crate::lpm::{UnivariatePoly, REAL_ROOT_TOL};
use crate::{Error, Result};

/// Hard limits on exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_n: usize,
    pub max_k: usize,
    pub max_subsets: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_n: 12,
            max_k: 5,
            max_subsets: 1_000_000,
        }
    }
}

impl OracleBudget {
    pub fn check(&self, n: usize, k: usize) -> Result<()> {
        if n > self.max_n {
            return Err(Error::BudgetExceeded(format!("n = {n} exceeds max_n = {}", self.max_n)));
        }
        if k > self.max_k {
            return Err(Error::BudgetExceeded(format!("k = {k} exceeds max_k = {}", self.max_k)));
        }
        let count = binomial(n, k);
        if count > self.max_subsets as f64 {
            return Err(Error::BudgetExceeded(format!(
                "C({n}, {k}) = {count} exceeds max_subsets = {}",
                self.max_subsets
            )));
        }
        Ok(())
    }
}

/// All `k`-subsets of `[n]` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Subsets {
    Subsets {
        n,
        current: if k <= n { Some((0..k).collect()) } else { None },
    }
}

#[derive(Debug, Clone)]
pub struct Subsets {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Subsets {
    type Item = SupportSet;

    fn next(&mut self) -> Option<SupportSet> {
        let cur = self.current.take()?;
        let out = SupportSet::new(cur.clone(), self.n.max(1)).ok()?;
        let k = cur.len();
        let mut next = cur;
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// Exact sparse QCQP optimum by enumerating every `k`-subset.
///
/// Ties go to the lexicographically smallest support.
pub fn brute_force_qcqp(a0: &SymMatrix, a1: &SymMatrix, k: usize, budget: &OracleBudget) -> Result<(f64, SupportSet)> {
    let n = a0.n();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must be in 1..={n}")));
    }
    budget.check(n, k)?;
    best_support(a0, a1, subsets(n, k))
}

/// Exact optimum over an explicit family of supports.
pub fn brute_force_qcqp_family(
    a0: &SymMatrix,
    a1: &SymMatrix,
    family: &[SupportSet],
    budget: &OracleBudget,
) -> Result<(f64, SupportSet)> {
    if family.len() > budget.max_subsets {
        return Err(Error::BudgetExceeded(format!("{} supports", family.len())));
    }
    let mut sorted = family.to_vec();
    sorted.sort();
    best_support(a0, a1, sorted.into_iter())
}

fn best_support(a0: &SymMatrix, a1: &SymMatrix, family: impl Iterator<Item = SupportSet>) -> Result<(f64, SupportSet)> {
    let mut best: Option<(f64, SupportSet)> = None;
    for s in family {
        let value = match inner_qcqp_solve(a0, a1, &s) {
            Ok((v, _)) => v,
            Err(Error::InfeasibleSupport { .. }) => continue,
            Err(e) => return Err(e),
        };
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, s));
        }
    }
    best.ok_or_else(|| Error::InfeasibleSupport { support: Vec::new() })
}

/// `sum_S a_S det(X|_S)`, literally.
pub fn lpm_direct_eval(coeffs: &BTreeMap<SupportSet, f64>, x: &SymMatrix, budget: &OracleBudget) -> Result<f64> {
    if x.n() > budget.max_n {
        return Err(Error::BudgetExceeded(format!("n = {} exceeds max_n = {}", x.n(), budget.max_n)));
    }
    if coeffs.len() > budget.max_subsets {
        return Err(Error::BudgetExceeded(format!("{} terms", coeffs.len())));
    }
    if let Some(s) = coeffs.keys().find(|s| s.iter().any(|i| i >= x.n())) {
        return Err(Error::invalid(format!("support {:?} out of range", s.as_slice())));
    }
    Ok(coeffs.iter().map(|(s, a)| a * x.minor(s)).sum())
}

/// Every companion-matrix root has `|Im| <= 1e-6 (1 + |Re|)`.
pub fn real_rootedness_check(g: &UnivariatePoly) -> bool {
    g.roots().iter().all(|z| z.im.abs() <= REAL_ROOT_TOL * (1.0 + z.re.abs()))
}
