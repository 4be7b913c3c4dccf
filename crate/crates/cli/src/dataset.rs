//! CSV ingestion and column standardization.

use std::path::Path;

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use sqcqp_core::SymMatrix;

use crate::error::CliError;

/// A rectangular numeric table; rows are samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub columns: Vec<String>,
    pub features: DMatrix<f64>,
    pub response: Option<DVector<f64>>,
    pub response_name: Option<String>,
    pub provenance: String,
}

/// What ingestion had to do to produce a clean table.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub had_header: bool,
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub columns_dropped: Vec<String>,
}

impl Dataset {
    pub fn n_samples(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    /// `X'X / m` of the feature block; the correlation matrix once standardized.
    pub fn gram(&self) -> Result<SymMatrix, CliError> {
        let m = self.n_samples().max(1) as f64;
        Ok(SymMatrix::new(self.features.tr_mul(&self.features) / m)?)
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok()
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c.eq_ignore_ascii_case("nan") || c.eq_ignore_ascii_case("na") || c == "?"
}

/// Read a numeric CSV. The first row is a header when any of its cells is
/// not a number. Rows with missing cells are dropped with a warning; any
/// other non-numeric cell is an error.
///
/// `response` names a column (or gives its 0-based index) to split off.
pub fn ingest_csv(path: &Path, response: Option<&str>) -> Result<(Dataset, Diagnostics), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if rec.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        records.push(rec.iter().map(str::to_string).collect::<Vec<_>>());
    }
    let name = path.file_stem().map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    from_records(&name, records, response, format!("csv:{}", path.display()))
}

/// [`ingest_csv`] on rows already split into cells.
pub fn from_records(
    name: &str,
    mut records: Vec<Vec<String>>,
    response: Option<&str>,
    provenance: String,
) -> Result<(Dataset, Diagnostics), CliError> {
    let mut diag = Diagnostics::default();
    if records.is_empty() {
        return Err(CliError::Input(format!("{name}: empty table")));
    }
    let width = records[0].len();
    diag.had_header = records[0].iter().any(|c| parse_cell(c).is_none() && !is_missing(c));
    let columns: Vec<String> = if diag.had_header {
        records.remove(0).into_iter().map(|c| c.trim().to_string()).collect()
    } else {
        (0..width).map(|j| format!("x{j}")).collect()
    };

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let line = i + 1 + usize::from(diag.had_header);
        diag.rows_read += 1;
        if rec.len() != width {
            return Err(CliError::Input(format!("{name}: line {line} has {} cells, expected {width}", rec.len())));
        }
        if rec.iter().any(|c| is_missing(c)) {
            diag.rows_dropped += 1;
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, c)| {
                parse_cell(c)
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::Input(format!("{name}: line {line}, column {}: {c:?} is not a number", columns[j])))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    if diag.rows_dropped > 0 {
        warn!("{name}: dropped {} of {} rows with missing values", diag.rows_dropped, diag.rows_read);
    }
    if rows.is_empty() || width == 0 {
        return Err(CliError::Input(format!("{name}: no complete rows")));
    }

    let resp_idx = match response {
        None => None,
        Some(r) => Some(
            columns
                .iter()
                .position(|c| c == r)
                .or_else(|| r.parse::<usize>().ok().filter(|&j| j < width))
                .ok_or_else(|| CliError::Input(format!("{name}: no response column {r:?}")))?,
        ),
    };
    let feat_idx: Vec<usize> = (0..width).filter(|&j| Some(j) != resp_idx).collect();
    if feat_idx.is_empty() {
        return Err(CliError::Input(format!("{name}: no feature columns")));
    }
    let features = DMatrix::from_fn(rows.len(), feat_idx.len(), |i, j| rows[i][feat_idx[j]]);
    let response = resp_idx.map(|r| DVector::from_iterator(rows.len(), rows.iter().map(|row| row[r])));
    Ok((
        Dataset {
            name: name.to_string(),
            columns: feat_idx.iter().map(|&j| columns[j].clone()).collect(),
            features,
            response,
            response_name: resp_idx.map(|r| columns[r].clone()),
            provenance,
        },
        diag,
    ))
}

fn moments(col: impl Iterator<Item = f64> + Clone, m: f64) -> (f64, f64) {
    let mean = col.clone().sum::<f64>() / m;
    let var = col.map(|v| (v - mean) * (v - mean)).sum::<f64>() / m;
    (mean, var)
}

/// Standardize every feature column (and the response) to mean 0 and
/// population variance 1. Constant feature columns are dropped with a warning.
pub fn standardize(d: &Dataset) -> Result<(Dataset, Vec<String>), CliError> {
    let m = d.n_samples() as f64;
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    let mut stats = Vec::new();
    for j in 0..d.n_features() {
        let (mean, var) = moments(d.features.column(j).iter().copied(), m);
        if var.sqrt() <= 1e-12 * mean.abs().max(1.0) {
            dropped.push(d.columns[j].clone());
        } else {
            keep.push(j);
            stats.push((mean, var.sqrt()));
        }
    }
    if keep.is_empty() {
        return Err(CliError::Input(format!("{}: every feature column is constant", d.name)));
    }
    if !dropped.is_empty() {
        warn!("{}: dropped constant columns {dropped:?}", d.name);
    }
    let features = DMatrix::from_fn(d.n_samples(), keep.len(), |i, j| (d.features[(i, keep[j])] - stats[j].0) / stats[j].1);
    let response = match &d.response {
        None => None,
        Some(b) => {
            let (mean, var) = moments(b.iter().copied(), m);
            if var.sqrt() <= 1e-12 * mean.abs().max(1.0) {
                return Err(CliError::Input(format!("{}: response column is constant", d.name)));
            }
            Some(b.map(|v| (v - mean) / var.sqrt()))
        }
    };
    Ok((
        Dataset {
            name: d.name.clone(),
            columns: keep.iter().map(|&j| d.columns[j].clone()).collect(),
            features,
            response,
            response_name: d.response_name.clone(),
            provenance: d.provenance.clone(),
        },
        dropped,
    ))
}

/// Read a square CSV holding a symmetric matrix directly (header optional).
pub fn ingest_matrix(path: &Path) -> Result<(String, SymMatrix), CliError> {
    let (d, _) = ingest_csv(path, None)?;
    if d.n_samples() != d.n_features() {
        return Err(CliError::Input(format!(
            "{}: a matrix input must be square, got {}x{}",
            d.name,
            d.n_samples(),
            d.n_features()
        )));
    }
    let asym = (&d.features - d.features.transpose()).abs().max();
    if asym > 1e-9 * d.features.abs().max().max(1.0) {
        return Err(CliError::Input(format!("{}: matrix is not symmetric", d.name)));
    }
    Ok((d.name, SymMatrix::new(d.features)?))
}
