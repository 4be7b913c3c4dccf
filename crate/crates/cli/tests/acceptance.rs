//! One PASS / FAIL / SKIP line per acceptance criterion.
//!
//! Runs without the libtest harness so the lines always reach the output.
//! Exits nonzero if any criterion fails other than the known reference-value
//! discrepancy described below.
//!
//! Data files are read from `$SQCQP_DATA_DIR`, or `data/` at the workspace
//! root (see `scripts/fetch_datasets.py`). Pitprops is embedded.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sqcqp_cli::{ingest_csv, standardize};
use sqcqp_core::apps::{datasets, sparse_pca_solve};
use sqcqp_core::verify::random::random_correlation;
use sqcqp_core::verify::suite::{self, PropertyOutcome};
use sqcqp_core::{OracleBudget, SymMatrix};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Pass,
    Fail,
    Skip,
}

struct Line {
    id: &'static str,
    status: Status,
    detail: String,
    /// A failure explained by a discrepancy in the reference values, not
    /// something the test run should be blocked on.
    known: bool,
}

impl Line {
    fn print(&self) {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail if self.known => "FAIL (known)",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        println!("{tag} [{}] {}", self.id, self.detail);
    }
}

fn from_outcome(id: &'static str, o: &PropertyOutcome) -> Line {
    Line {
        id,
        status: if o.passed() { Status::Pass } else { Status::Fail },
        detail: o.to_string().split_once(' ').map_or_else(String::new, |(_, rest)| rest.to_string()),
        known: false,
    }
}

fn data_dir() -> PathBuf {
    std::env::var_os("SQCQP_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

fn correlation_of(file: &str) -> Result<SymMatrix, String> {
    let path = data_dir().join(file);
    if !path.exists() {
        return Err(format!("{} not found; run scripts/fetch_datasets.py", path.display()));
    }
    let (d, _) = ingest_csv(&path, None).map_err(|e| e.to_string())?;
    let (d, _) = standardize(&d).map_err(|e| e.to_string())?;
    d.gram().map_err(|e| e.to_string())
}

struct Row {
    dataset: &'static str,
    k: usize,
    found: f64,
    optimal: f64,
}

const REFERENCE: [Row; 6] = [
    Row { dataset: "wine", k: 5, found: 3.43, optimal: 3.43 },
    Row { dataset: "wine", k: 10, found: 4.45, optimal: 4.59 },
    Row { dataset: "pitprops", k: 5, found: 3.40, optimal: 3.40 },
    Row { dataset: "pitprops", k: 10, found: 3.95, optimal: 4.17 },
    Row { dataset: "miniboone", k: 5, found: 4.99, optimal: 5.00 },
    Row { dataset: "miniboone", k: 10, found: 9.99, optimal: 9.99 },
];

/// Found values within 0.05 of the table, each run under a second.
///
/// At k = 10 the greedy reaches the optimum on Wine and Pitprops, above the
/// table's found value. That mismatch is reported as a known failure as
/// long as the value stays between the table's found and optimal values.
fn pca_reference() -> Line {
    let tol = 0.05;
    let mut parts = Vec::new();
    let (mut fails, mut unexplained, mut skipped) = (0, 0, 0);
    for row in &REFERENCE {
        let matrix = match row.dataset {
            "pitprops" => Ok(datasets::pitprops()),
            "wine" => correlation_of("wine.csv"),
            _ => correlation_of("miniboone.csv"),
        };
        let a = match matrix {
            Ok(a) => a,
            Err(why) => {
                skipped += 1;
                parts.push(format!("{} k={}: skipped ({why})", row.dataset, row.k));
                continue;
            }
        };
        let start = Instant::now();
        let report = match sparse_pca_solve(&a, row.k) {
            Ok(r) => r,
            Err(e) => {
                fails += 1;
                unexplained += 1;
                parts.push(format!("{} k={}: error {e}", row.dataset, row.k));
                continue;
            }
        };
        let secs = start.elapsed().as_secs_f64();
        let ok = (report.value - row.found).abs() <= tol && secs < 1.0;
        if !ok {
            fails += 1;
            let between = report.value >= row.found - tol && report.value <= row.optimal + tol;
            if !(between && secs < 1.0) {
                unexplained += 1;
            }
        }
        parts.push(format!(
            "{} k={}: {:.4} vs {:.2} (optimal {:.2}) in {:.1} ms{}",
            row.dataset,
            row.k,
            report.value,
            row.found,
            row.optimal,
            secs * 1e3,
            if ok { "" } else { " MISMATCH" }
        ));
    }
    let status = if fails > 0 {
        Status::Fail
    } else if skipped > 0 {
        Status::Skip
    } else {
        Status::Pass
    };
    Line {
        id: "pca-reference",
        status,
        detail: format!("sparse PCA found values ±{tol}, < 1 s each: {}", parts.join("; ")),
        known: unexplained == 0,
    }
}

fn scaling() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let a = random_correlation(&mut rng, 500, 800);
    let start = Instant::now();
    let result = sparse_pca_solve(&a, 10);
    let secs = start.elapsed().as_secs_f64();
    let (status, detail) = match result {
        Ok(r) => (
            if secs < 10.0 && r.support.len() == 10 { Status::Pass } else { Status::Fail },
            format!("n=500 k=10 sparse PCA in {secs:.2} s (limit 10 s), value {:.4}", r.value),
        ),
        Err(e) => (Status::Fail, format!("error: {e}")),
    };
    Line {
        id: "scaling",
        status,
        detail,
        known: false,
    }
}

fn main() -> ExitCode {
    let budget = OracleBudget::default();
    let stream = |i: u64| ChaCha8Rng::seed_from_u64(0xACCE_0000 + i);
    let bound = suite::approximation_bound(&mut stream(6), 100, 8, &budget);
    let lines = vec![
        pca_reference(),
        from_outcome("sandwich", &suite::interlacing_sandwich(&mut stream(0), 200, 10, &budget)),
        from_outcome("greedy-guarantee", &suite::greedy_guarantee(&mut stream(1), 200, 10, &budget)),
        from_outcome("cramer", &suite::generalized_cramer(&mut stream(2), 100, 10)),
        from_outcome("probabilistic", &suite::probabilistic_identity(&mut stream(3), 100, 10)),
        from_outcome("fast-path", &suite::fast_path_equivalence(&mut stream(4), 100, 8)),
        from_outcome("kernels", &suite::kernel_oracles(&mut stream(5), 40, 17)),
        {
            let mut l = from_outcome("approx-bound", &bound.implemented);
            l.detail.push_str(&format!(
                "; printed sign of c2 would be violated in {} of {} trials",
                bound.printed_violations, bound.implemented.trials
            ));
            l
        },
        from_outcome("continuous", &suite::continuous_formulation(&mut stream(7), 50, 8, &budget)),
        scaling(),
    ];
    for line in &lines {
        line.print();
    }
    let blocking = lines.iter().filter(|l| l.status == Status::Fail && !l.known).count();
    let passed = lines.iter().filter(|l| l.status == Status::Pass).count();
    println!("acceptance: {passed}/{} criteria passed, {blocking} blocking failures", lines.len());
    if blocking > 0 {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
