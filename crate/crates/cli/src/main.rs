use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use sqcqp_cli::experiment::{bench_sweep, write_csv, write_outputs};
use sqcqp_cli::{run_experiment, CliError, ExperimentConfig, Method, Report, RunRecord, Source, Task};
use sqcqp_core::verify::suite::{run_suite, SuiteConfig};
use sqcqp_core::OracleBudget;

#[derive(Parser, Debug)]
#[command(name = "sqcqp", version, about = "Greedy sparse QCQP solvers: sparse PCA and sparse regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Interpolation nodes for the characteristic method (default k + 1).
    #[arg(long, global = true)]
    nodes: Option<usize>,

    /// Absolute tolerance when comparing found values to --optimal.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for `<dataset>_<task>.csv` and `.json` outputs.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Enumeration limits `max_n,max_k,max_subsets` for brute force.
    #[arg(long, global = true)]
    budget: Option<String>,

    /// Format printed on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sparse PCA on the correlation matrix of a CSV (or a given matrix).
    Pca(PcaArgs),
    /// Sparse least-squares regression.
    Regress(RegressArgs),
    /// Run the randomized property suite against the brute-force oracles.
    Verify(VerifyArgs),
    /// Timing sweep on random correlation matrices.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct PcaArgs {
    /// CSV of samples, or `builtin:pitprops`.
    #[arg(long)]
    input: String,
    /// Treat --input as a symmetric matrix rather than samples.
    #[arg(long)]
    matrix: bool,
    /// Sparsity levels, e.g. `5,10` or `1-10`.
    #[arg(long, value_parser = parse_list)]
    k: IndexList,
    /// CSV of `k,optimal` reference values for the Gap column.
    #[arg(long)]
    optimal: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "char")]
    methods: Vec<String>,
}

#[derive(Args, Debug)]
struct RegressArgs {
    #[arg(long)]
    input: String,
    /// Response column, by header name or 0-based index.
    #[arg(long)]
    response: String,
    #[arg(long, value_parser = parse_list)]
    k: IndexList,
    #[arg(long, value_delimiter = ',', default_value = "char,omp")]
    methods: Vec<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Multiplier on every property's trial count.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_parser = parse_list, default_value = "50,100,200")]
    n: IndexList,
    #[arg(long, value_parser = parse_list, default_value = "5,10")]
    k: IndexList,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Parsed by [`parse_list`]; an alias so clap takes it as one value.
type IndexList = Vec<usize>;

/// `3`, `1,2,5`, `1-10` or a mix such as `1-3,8`.
fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || format!("cannot parse {part:?} as a number or a-b range");
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if a > b {
                    return Err(format!("empty range {part:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

fn parse_budget(s: &str) -> Result<OracleBudget, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<usize>().map_err(|_| CliError::Input(format!("bad budget field {p:?}")));
    match parts.as_slice() {
        [n, k, m] => Ok(OracleBudget {
            max_n: num(n)?,
            max_k: num(k)?,
            max_subsets: num(m)?,
        }),
        _ => Err(CliError::Input("--budget expects max_n,max_k,max_subsets".into())),
    }
}

fn methods(names: &[String]) -> Result<Vec<Method>, CliError> {
    names.iter().map(|m| m.parse()).collect()
}

fn emit(cli: &Cli, stem: &str, report: &Report) -> Result<(), CliError> {
    if let Some(dir) = &cli.output_dir {
        let (c, j) = write_outputs(dir, stem, report)?;
        info!("wrote {} and {}", c.display(), j.display());
    }
    let stdout = std::io::stdout();
    match cli.format {
        Format::Csv => write_csv(&report.records, stdout.lock()),
        Format::Json => {
            let mut out = stdout.lock();
            writeln!(out, "{}", serde_json::to_string_pretty(report)?)?;
            Ok(())
        }
    }
}

fn experiment(cli: &Cli, config: ExperimentConfig) -> Result<(), CliError> {
    let records = run_experiment(&config)?;
    let dataset = records.first().map_or("dataset", |r| r.dataset.as_str()).to_string();
    let task = if config.task == Task::Pca { "pca" } else { "regress" };
    emit(cli, &format!("{dataset}_{task}"), &Report::new(&config, records))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Input(format!("--threads: {e}")))?;
    }
    let budget = cli.budget.as_deref().map(parse_budget).transpose()?.unwrap_or_default();
    match &cli.command {
        Command::Pca(a) => {
            let mut cfg = ExperimentConfig::new(
                Source::parse(&a.input, a.matrix),
                Task::Pca,
                a.k.clone(),
                methods(&a.methods)?,
            );
            cfg.optimal = a.optimal.clone();
            cfg.budget = budget;
            cfg.nodes = cli.nodes;
            cfg.tol = cli.tol;
            experiment(cli, cfg)
        }
        Command::Regress(a) => {
            let mut cfg =
                ExperimentConfig::new(Source::parse(&a.input, false), Task::Regress, a.k.clone(), methods(&a.methods)?);
            cfg.response = Some(a.response.clone());
            cfg.budget = budget;
            cfg.nodes = cli.nodes;
            cfg.tol = cli.tol;
            experiment(cli, cfg)
        }
        Command::Verify(v) => {
            let cfg = SuiteConfig {
                seed: v.seed,
                scale: v.scale,
                budget,
            };
            if !(cfg.scale > 0.0 && cfg.scale.is_finite()) {
                return Err(CliError::Input("--scale must be positive".into()));
            }
            let outcomes = run_suite(&cfg);
            for o in &outcomes {
                println!("{o}");
            }
            let failed = outcomes.iter().filter(|o| !o.passed()).count();
            if failed > 0 {
                return Err(CliError::Numerical(format!("{failed} of {} properties failed", outcomes.len())));
            }
            Ok(())
        }
        Command::Bench(b) => {
            let records: Vec<RunRecord> = bench_sweep(&b.n.clone(), &b.k.clone(), b.seed)?;
            let mut cfg = ExperimentConfig::new(Source::Builtin("random".into()), Task::Pca, b.k.clone(), vec![Method::Char]);
            cfg.nodes = cli.nodes;
            emit(cli, "bench", &Report::new(&cfg, records))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sqcqp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_list("5").unwrap(), vec![5]);
        assert_eq!(parse_list("1-3,8").unwrap(), vec![1, 2, 3, 8]);
        assert!(parse_list("3-1").is_err());
        assert!(parse_list("x").is_err());
        assert!(parse_list("").is_err());
    }

    #[test]
    fn budget_triple() {
        let b = parse_budget("8,3,100").unwrap();
        assert_eq!((b.max_n, b.max_k, b.max_subsets), (8, 3, 100));
        assert!(parse_budget("8,3").is_err());
    }
}
