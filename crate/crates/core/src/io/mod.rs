//! CSV and JSON reading and writing, plus seeded synthetic datasets.
//!
//! Numbers are written in Rust's shortest round-trip decimal form, so every
//! `f64` reads back bit-identical.

pub mod synthetic;

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::gmm::{CovarianceConstraint, Covariances, Criterion, GmmModel};
use crate::hgmm::DendrogramNode;
use crate::init::InitMethod;
use crate::metrics::BenchmarkReport;
use crate::search::SearchResult;

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    Ok(text)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish(path: &Path, mut w: impl Write) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => parse_error(path, line, format!("{other:?}")),
    }
}

/// Parses comma-separated numeric rows. `path` only labels errors.
pub fn parse_matrix(text: &str, has_header: bool, path: &Path) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut values = Vec::new();
    let mut ncols = None;
    let mut nrows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        match ncols {
            None => ncols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(parse_error(
                    path,
                    line,
                    format!("expected {c} fields, found {}", record.len()),
                ))
            }
            Some(_) => {}
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                parse_error(
                    path,
                    line,
                    format!("field {} is not a number: `{field}`", j + 1),
                )
            })?;
            if !v.is_finite() {
                return Err(parse_error(
                    path,
                    line,
                    format!("field {} is not finite", j + 1),
                ));
            }
            values.push(v);
        }
        nrows += 1;
    }
    let Some(ncols) = ncols else {
        return Err(parse_error(path, 1, "no data rows"));
    };
    DataMatrix::new(nrows, ncols, values)
}

/// Reads an `n × d` matrix from a CSV file, skipping a header row when asked.
pub fn read_matrix(path: impl AsRef<Path>, has_header: bool) -> Result<DataMatrix> {
    let path = path.as_ref();
    parse_matrix(&read_text(path)?, has_header, path)
}

pub fn write_matrix(path: impl AsRef<Path>, data: &DataMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for row in data.rows() {
        let line: Vec<String> = row.iter().map(f64::to_string).collect();
        writeln!(w, "{}", line.join(",")).map_err(|e| Error::io(path, e))?;
    }
    finish(path, w)
}

/// Reads one non-negative integer label per line.
pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let path = path.as_ref();
    let text = read_text(path)?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        labels.push(
            line.parse()
                .map_err(|_| parse_error(path, i as u64 + 1, format!("not a label: `{line}`")))?,
        );
    }
    if labels.is_empty() {
        return Err(parse_error(path, 1, "no labels"));
    }
    Ok(labels)
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    for l in labels {
        writeln!(w, "{l}").map_err(|e| Error::io(path, e))?;
    }
    finish(path, w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitRecord {
    /// `l2`, `l1`, `cosine` or `none` (k-means).
    pub affinity: String,
    pub linkage: Option<String>,
}

impl From<InitMethod> for InitRecord {
    fn from(m: InitMethod) -> Self {
        Self {
            affinity: m.affinity_name().to_string(),
            linkage: m.linkage_name().map(str::to_string),
        }
    }
}

/// Serialized form of a selected mixture.
///
/// `covariances` mirrors the constraint: `[k][d][d]` for full, `[d][d]` for
/// tied, `[k][d]` for diag and `[k]` for spherical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub criterion: Criterion,
    pub criterion_value: f64,
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub constraint: CovarianceConstraint,
    pub reg_covar: f64,
    pub init: InitRecord,
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covariances: Value,
    pub seed: u64,
}

fn square(flat: &[f64], d: usize) -> Vec<Vec<f64>> {
    flat.chunks(d).map(<[f64]>::to_vec).collect()
}

fn covariances_value(c: &Covariances, d: usize) -> Value {
    match c {
        Covariances::Full(m) => {
            serde_json::json!(m.iter().map(|x| square(x, d)).collect::<Vec<_>>())
        }
        Covariances::Tied(m) => serde_json::json!(square(m, d)),
        Covariances::Diag(v) => serde_json::json!(v),
        Covariances::Spherical(v) => serde_json::json!(v),
    }
}

fn covariances_from_value(constraint: CovarianceConstraint, v: &Value) -> Result<Covariances> {
    let bad = |e: serde_json::Error| Error::Input(format!("{constraint} covariances: {e}"));
    let flat = |m: Vec<Vec<f64>>| m.into_iter().flatten().collect::<Vec<f64>>();
    Ok(match constraint {
        CovarianceConstraint::Full => {
            let m: Vec<Vec<Vec<f64>>> = serde_json::from_value(v.clone()).map_err(bad)?;
            Covariances::Full(m.into_iter().map(flat).collect())
        }
        CovarianceConstraint::Tied => {
            Covariances::Tied(flat(serde_json::from_value(v.clone()).map_err(bad)?))
        }
        CovarianceConstraint::Diag => {
            Covariances::Diag(serde_json::from_value(v.clone()).map_err(bad)?)
        }
        CovarianceConstraint::Spherical => {
            Covariances::Spherical(serde_json::from_value(v.clone()).map_err(bad)?)
        }
    })
}

impl ModelRecord {
    pub fn new(
        model: &GmmModel,
        criterion: Criterion,
        criterion_value: f64,
        n: usize,
        method: InitMethod,
        seed: u64,
    ) -> Self {
        Self {
            criterion,
            criterion_value,
            k: model.k(),
            d: model.d(),
            n,
            constraint: model.constraint(),
            reg_covar: model.reg_covar(),
            init: method.into(),
            weights: model.weights().to_vec(),
            means: model.means().to_vec(),
            covariances: covariances_value(model.covariances(), model.d()),
            seed,
        }
    }

    pub fn from_search(result: &SearchResult, seed: u64) -> Self {
        let best = &result.best;
        let fit = best.fit.as_ref().expect("best candidate is converged");
        Self::new(
            &fit.model,
            result.criterion,
            best.criterion_value.expect("best candidate has a value"),
            result.n_samples,
            best.method,
            seed,
        )
    }

    pub fn to_model(&self) -> Result<GmmModel> {
        let model = GmmModel::new(
            self.weights.clone(),
            self.means.clone(),
            covariances_from_value(self.constraint, &self.covariances)?,
            self.reg_covar,
        )?;
        if model.k() != self.k || model.d() != self.d {
            return Err(Error::Input(format!(
                "model record declares k={}, d={} but stores k={}, d={}",
                self.k,
                self.d,
                model.k(),
                model.d()
            )));
        }
        Ok(model)
    }
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    finish(path, w)
}

pub fn read_model(path: impl AsRef<Path>) -> Result<ModelRecord> {
    let path = path.as_ref();
    serde_json::from_str(&read_text(path)?).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// One line per grid cell: `affinity,linkage,constraint,k,status,criterion_value,reg_covar`.
/// Failed cells leave `criterion_value` empty; k-means cells leave `linkage` empty.
pub fn write_grid(path: impl AsRef<Path>, result: &SearchResult) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = |e| csv_error(path, e);
    w.write_record([
        "affinity",
        "linkage",
        "constraint",
        "k",
        "status",
        "criterion_value",
        "reg_covar",
    ])
    .map_err(err)?;
    for c in &result.grid {
        w.write_record([
            c.method.affinity_name().to_string(),
            c.method.linkage_name().unwrap_or("").to_string(),
            c.constraint.name().to_string(),
            c.k.to_string(),
            c.status.name().to_string(),
            c.criterion_value.map_or(String::new(), |v| v.to_string()),
            c.reg_covar.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Nested dendrogram form: `{depth, size, children, model, leaf_reason}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DendrogramRecord {
    pub depth: usize,
    pub size: usize,
    pub children: Vec<DendrogramRecord>,
    pub model: Option<ModelRecord>,
    pub leaf_reason: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl DendrogramRecord {
    pub fn new(node: &DendrogramNode, criterion: Criterion) -> Self {
        Self {
            depth: node.depth,
            size: node.indices.len(),
            children: node
                .children
                .iter()
                .map(|c| Self::new(c, criterion))
                .collect(),
            model: node.model.as_ref().map(|m| {
                ModelRecord::new(
                    &m.model,
                    criterion,
                    m.criterion_value,
                    node.indices.len(),
                    m.method,
                    m.seed,
                )
            }),
            leaf_reason: node.leaf_reason.map(|r| r.name()),
            failure: node.failure.clone(),
        }
    }
}

/// Writes the per-cell table `rep,config,k,ari,status` (timing-free, so it is
/// reproducible) and the per-cell timings `rep,config,seconds` separately.
pub fn write_benchmark_tables(
    records_path: impl AsRef<Path>,
    timing_path: impl AsRef<Path>,
    report: &BenchmarkReport,
) -> Result<()> {
    let path = records_path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = |e| csv_error(path, e);
    w.write_record(["rep", "config", "k", "ari", "status"])
        .map_err(err)?;
    for r in &report.records {
        w.write_record([
            r.rep.to_string(),
            r.config.clone(),
            r.k.map_or(String::new(), |k| k.to_string()),
            r.ari.map_or(String::new(), |a| a.to_string()),
            if r.failure.is_none() {
                "converged"
            } else {
                "failed"
            }
            .to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;

    let path = timing_path.as_ref();
    let mut w = csv::Writer::from_writer(create(path)?);
    let err = |e| csv_error(path, e);
    w.write_record(["rep", "config", "seconds"]).map_err(err)?;
    for r in &report.records {
        w.write_record([r.rep.to_string(), r.config.clone(), r.seconds.to_string()])
            .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// JSON summary of everything in the report that does not depend on timing:
/// settings, shared subsamples and the pairwise ARI tests.
pub fn write_benchmark_summary(path: impl AsRef<Path>, report: &BenchmarkReport) -> Result<()> {
    let tests: Vec<_> = report.tests.iter().filter(|t| t.metric == "ari").collect();
    write_json(
        path,
        &serde_json::json!({
            "reps": report.reps,
            "frac": report.frac,
            "subsample_size": report.subsample_size,
            "seed": report.seed,
            "subsamples": report.subsamples,
            "tests": tests,
        }),
    )
}

/// JSON summary of the runtime comparisons, with the worker-thread count the
/// cells were scheduled on.
pub fn write_timing_summary(path: impl AsRef<Path>, report: &BenchmarkReport) -> Result<()> {
    let tests: Vec<_> = report
        .tests
        .iter()
        .filter(|t| t.metric == "seconds")
        .collect();
    write_json(
        path,
        &serde_json::json!({
            "threads": report.threads,
            "tests": tests,
        }),
    )
}
