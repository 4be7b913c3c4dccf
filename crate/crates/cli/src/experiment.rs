//! Experiment grid: one run per (method, k), reported as [`RunRecord`]s.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sqcqp_core::apps::{datasets, least_squares_on, omp_baseline, sparse_pca_solve_with_nodes, sparse_regression_solve};
use sqcqp_core::verify::brute_force_qcqp;
use sqcqp_core::{OracleBudget, RegressionInstance, SymMatrix};

use crate::dataset::{ingest_csv, ingest_matrix, standardize};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Pca,
    Regress,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Char,
    Omp,
    Brute,
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "char" => Ok(Method::Char),
            "omp" => Ok(Method::Omp),
            "brute" => Ok(Method::Brute),
            other => Err(CliError::Input(format!("unknown method {other:?} (expected char, omp or brute)"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Char => "char",
            Method::Omp => "omp",
            Method::Brute => "brute",
        })
    }
}

/// Where the PCA matrix or regression table comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    /// Raw samples; PCA uses the correlation matrix of standardized columns.
    Csv(PathBuf),
    /// A symmetric matrix given directly.
    Matrix(PathBuf),
    /// A table shipped with the crate (`pitprops`).
    Builtin(String),
}

impl Source {
    /// `builtin:<name>` selects an embedded table; anything else is a path.
    pub fn parse(input: &str, matrix: bool) -> Source {
        match input.strip_prefix("builtin:") {
            Some(name) => Source::Builtin(name.to_string()),
            None if matrix => Source::Matrix(PathBuf::from(input)),
            None => Source::Csv(PathBuf::from(input)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: Source,
    pub task: Task,
    pub ks: Vec<usize>,
    pub methods: Vec<Method>,
    /// Regression response column (name or index).
    pub response: Option<String>,
    /// `k,optimal` reference values for the Gap column.
    pub optimal: Option<PathBuf>,
    /// Interpolation nodes for the characteristic method; `k + 1` when absent.
    pub nodes: Option<usize>,
    /// Absolute tolerance for [`RunRecord::matches_optimal`].
    pub tol: f64,
    pub budget: OracleBudget,
}

impl ExperimentConfig {
    pub fn new(source: Source, task: Task, ks: Vec<usize>, methods: Vec<Method>) -> Self {
        ExperimentConfig {
            source,
            task,
            ks,
            methods,
            response: None,
            optimal: None,
            nodes: None,
            tol: 1e-6,
            budget: OracleBudget::default(),
        }
    }

    /// First 16 hex digits of SHA-256 over the JSON form of the config.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&json);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub dataset: String,
    pub task: Task,
    pub k: usize,
    /// Projection gain for regression, top eigenvalue of the block for PCA.
    pub value: f64,
    pub loss: Option<f64>,
    pub optimal: Option<f64>,
    /// `(optimal - value) / optimal`.
    pub gap: Option<f64>,
    pub matches_optimal: Option<bool>,
    pub time_ms: f64,
    pub support: Vec<usize>,
    pub config_hash: String,
}

/// CSV header matching [`RunRecord::csv_row`].
pub const CSV_HEADER: [&str; 12] = [
    "method",
    "dataset",
    "task",
    "k",
    "value",
    "loss",
    "optimal",
    "gap",
    "matches_optimal",
    "time_ms",
    "support",
    "config_hash",
];

fn opt_cell<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl RunRecord {
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.method.to_string(),
            self.dataset.clone(),
            match self.task {
                Task::Pca => "pca".into(),
                Task::Regress => "regress".into(),
            },
            self.k.to_string(),
            self.value.to_string(),
            opt_cell(self.loss),
            opt_cell(self.optimal),
            opt_cell(self.gap),
            opt_cell(self.matches_optimal),
            self.time_ms.to_string(),
            self.support.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
            self.config_hash.clone(),
        ]
    }
}

pub fn write_csv(records: &[RunRecord], out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.csv_row())?;
    }
    w.flush()?;
    Ok(())
}

/// Envelope for JSON output; records plus the choices that shaped them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub variance_divisor: String,
    pub pca_matrix: String,
    pub records: Vec<RunRecord>,
}

impl Report {
    pub fn new(config: &ExperimentConfig, records: Vec<RunRecord>) -> Self {
        Report {
            config: config.clone(),
            config_hash: config.hash(),
            variance_divisor: "population (n)".into(),
            pca_matrix: "X'X/n of standardized columns (correlation)".into(),
            records,
        }
    }
}

/// Write `<stem>.csv` and `<stem>.json` into `dir`.
pub fn write_outputs(dir: &Path, stem: &str, report: &Report) -> Result<(PathBuf, PathBuf), CliError> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write_csv(&report.records, std::fs::File::create(&csv_path)?)?;
    std::fs::write(&json_path, serde_json::to_string_pretty(report)?)?;
    Ok((csv_path, json_path))
}

/// `k,optimal` rows; a non-numeric first row is a header.
pub fn read_optimal(path: &Path) -> Result<BTreeMap<usize, f64>, CliError> {
    let (d, _) = ingest_csv(path, None)?;
    if d.n_features() < 2 {
        return Err(CliError::Input(format!("{}: expected columns k,optimal", path.display())));
    }
    let mut out = BTreeMap::new();
    for i in 0..d.n_samples() {
        let k = d.features[(i, 0)];
        if k < 1.0 || k.fract() != 0.0 {
            return Err(CliError::Input(format!("{}: k = {k} is not a positive integer", path.display())));
        }
        out.insert(k as usize, d.features[(i, 1)]);
    }
    Ok(out)
}

enum Problem {
    Pca(SymMatrix),
    Regress(DMatrix<f64>, DVector<f64>),
}

fn load(config: &ExperimentConfig) -> Result<(String, Problem), CliError> {
    match (&config.source, config.task) {
        (Source::Builtin(name), Task::Pca) if name == "pitprops" => Ok((name.clone(), Problem::Pca(datasets::pitprops()))),
        (Source::Builtin(name), _) => Err(CliError::Input(format!("no builtin {name:?} for this task (available: pitprops, pca)"))),
        (Source::Matrix(path), Task::Pca) => {
            let (name, a) = ingest_matrix(path)?;
            Ok((name, Problem::Pca(a)))
        }
        (Source::Matrix(_), Task::Regress) => Err(CliError::Input("regression needs raw samples, not a matrix".into())),
        (Source::Csv(path), Task::Pca) => {
            let (d, _) = ingest_csv(path, None)?;
            let (d, _) = standardize(&d)?;
            Ok((d.name.clone(), Problem::Pca(d.gram()?)))
        }
        (Source::Csv(path), Task::Regress) => {
            let response = config
                .response
                .as_deref()
                .ok_or_else(|| CliError::Input("regression needs --response".into()))?;
            let (d, _) = ingest_csv(path, Some(response))?;
            let (d, _) = standardize(&d)?;
            let b = d.response.clone().expect("response requested");
            Ok((d.name.clone(), Problem::Regress(d.features, b)))
        }
    }
}

fn validate(config: &ExperimentConfig, n: usize) -> Result<(), CliError> {
    if config.ks.is_empty() || config.methods.is_empty() {
        return Err(CliError::Input("need at least one k and one method".into()));
    }
    if let Some(&k) = config.ks.iter().find(|&&k| k == 0 || k > n) {
        return Err(CliError::Input(format!("k = {k} must be in 1..={n}")));
    }
    if config.task == Task::Pca && config.methods.contains(&Method::Omp) {
        return Err(CliError::Input("omp is a regression method".into()));
    }
    if let Some(ell) = config.nodes {
        if let Some(&k) = config.ks.iter().find(|&&k| ell < k + 1) {
            return Err(CliError::Input(format!("--nodes {ell} is below k + 1 = {}", k + 1)));
        }
    }
    if config.methods.contains(&Method::Brute) {
        for &k in &config.ks {
            config.budget.check(n, k)?;
        }
    }
    Ok(())
}

struct Outcome {
    value: f64,
    loss: Option<f64>,
    support: Vec<usize>,
}

fn run_one(problem: &Problem, method: Method, k: usize, config: &ExperimentConfig) -> Result<Outcome, CliError> {
    match problem {
        Problem::Pca(a) => match method {
            Method::Char => {
                let r = sparse_pca_solve_with_nodes(a, k, config.nodes.unwrap_or(k + 1))?;
                Ok(Outcome {
                    value: r.value,
                    loss: None,
                    support: r.support.into_vec(),
                })
            }
            Method::Brute => {
                let (value, s) = brute_force_qcqp(a, &SymMatrix::identity(a.n()), k, &config.budget)?;
                Ok(Outcome {
                    value,
                    loss: None,
                    support: s.into_vec(),
                })
            }
            Method::Omp => Err(CliError::Input("omp is a regression method".into())),
        },
        Problem::Regress(a, b) => {
            let r = match method {
                Method::Char => sparse_regression_solve(a, b, k)?,
                Method::Omp => omp_baseline(a, b, k)?,
                Method::Brute => {
                    let inst = RegressionInstance::new(a.clone(), b.clone(), k)?;
                    let (a0, a1) = inst.as_qcqp();
                    let (_, s) = brute_force_qcqp(&a0, &a1, k, &config.budget)?;
                    let (_, loss) = least_squares_on(a, b, &s)?;
                    return Ok(Outcome {
                        value: b.norm_squared() - loss,
                        loss: Some(loss),
                        support: s.into_vec(),
                    });
                }
            };
            Ok(Outcome {
                value: r.value,
                loss: r.loss,
                support: r.support.into_vec(),
            })
        }
    }
}

/// Runs every (method, k) pair of the grid in parallel; records come back
/// sorted by method, then `k`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>, CliError> {
    let (name, problem) = load(config)?;
    let n = match &problem {
        Problem::Pca(a) => a.n(),
        Problem::Regress(a, _) => a.ncols(),
    };
    validate(config, n)?;
    let optimal = config.optimal.as_deref().map(read_optimal).transpose()?;
    let hash = config.hash();

    let mut grid: Vec<(Method, usize)> = config
        .methods
        .iter()
        .flat_map(|&m| config.ks.iter().map(move |&k| (m, k)))
        .collect();
    grid.sort();
    grid.dedup();
    grid.par_iter()
        .map(|&(method, k)| {
            let start = Instant::now();
            let out = run_one(&problem, method, k, config)?;
            let time_ms = start.elapsed().as_secs_f64() * 1e3;
            let opt = optimal.as_ref().and_then(|m| m.get(&k).copied());
            Ok(RunRecord {
                method,
                dataset: name.clone(),
                task: config.task,
                k,
                value: out.value,
                loss: out.loss,
                optimal: opt,
                gap: opt.map(|o| (o - out.value) / o),
                matches_optimal: opt.map(|o| (o - out.value).abs() <= config.tol),
                time_ms,
                support: out.support,
                config_hash: hash.clone(),
            })
        })
        .collect()
}

/// Timing sweep of the characteristic method on random correlation matrices.
pub fn bench_sweep(ns: &[usize], ks: &[usize], seed: u64) -> Result<Vec<RunRecord>, CliError> {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use sqcqp_core::verify::random::random_correlation;

    let mut records = Vec::new();
    for &n in ns {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
        let a = random_correlation(&mut rng, n, 2 * n);
        let hash = {
            let digest = Sha256::digest(format!("bench:{n}:{seed}").as_bytes());
            digest.iter().take(8).map(|b| format!("{b:02x}")).collect::<String>()
        };
        for &k in ks.iter().filter(|&&k| k >= 1 && k <= n) {
            let start = Instant::now();
            let r = sparse_pca_solve_with_nodes(&a, k, k + 1)?;
            records.push(RunRecord {
                method: Method::Char,
                dataset: format!("random-correlation-n{n}"),
                task: Task::Pca,
                k,
                value: r.value,
                loss: None,
                optimal: None,
                gap: None,
                matches_optimal: None,
                time_ms: start.elapsed().as_secs_f64() * 1e3,
                support: r.support.into_vec(),
                config_hash: hash.clone(),
            });
        }
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pitprops(ks: Vec<usize>, methods: Vec<Method>) -> ExperimentConfig {
        ExperimentConfig::new(Source::Builtin("pitprops".into()), Task::Pca, ks, methods)
    }

    #[test]
    fn builtin_pitprops_runs() {
        let mut cfg = pitprops(vec![1, 2], vec![Method::Char, Method::Brute]);
        cfg.budget = OracleBudget { max_n: 13, ..OracleBudget::default() };
        let recs = run_experiment(&cfg).unwrap();
        assert_eq!(recs.len(), 4);
        assert!(recs.iter().all(|r| r.support.len() == r.k && r.time_ms >= 0.0));
        for k in [1, 2] {
            let c = recs.iter().find(|r| r.method == Method::Char && r.k == k).unwrap();
            let b = recs.iter().find(|r| r.method == Method::Brute && r.k == k).unwrap();
            assert!(c.value <= b.value + 1e-9);
        }
    }

    #[test]
    fn invalid_grids_are_input_errors() {
        for cfg in [
            pitprops(vec![0], vec![Method::Char]),
            pitprops(vec![14], vec![Method::Char]),
            pitprops(vec![2], vec![Method::Omp]),
            pitprops(vec![], vec![Method::Char]),
        ] {
            assert_eq!(run_experiment(&cfg).unwrap_err().exit_code(), 2);
        }
        let mut cfg = pitprops(vec![3], vec![Method::Char]);
        cfg.nodes = Some(3);
        assert_eq!(run_experiment(&cfg).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn brute_beyond_budget_is_a_budget_error() {
        let mut cfg = pitprops(vec![3], vec![Method::Brute]);
        cfg.budget.max_n = 10;
        assert_eq!(run_experiment(&cfg).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn hash_tracks_config() {
        let a = pitprops(vec![2], vec![Method::Char]);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.ks.push(3);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn records_round_trip_through_json() {
        let recs = run_experiment(&pitprops(vec![3], vec![Method::Char])).unwrap();
        let json = serde_json::to_string(&recs).unwrap();
        let back: Vec<RunRecord> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, recs);
    }
}
