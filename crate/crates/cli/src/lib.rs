//! Dataset ingestion, experiment grids and reporting for the `sqcqp` binary.

pub mod dataset;
mod error;
pub mod experiment;

pub use dataset::{ingest_csv, standardize, Dataset, Diagnostics};
pub use error::CliError;
pub use experiment::{run_experiment, ExperimentConfig, Method, Report, RunRecord, Source, Task};
