//! Exhaustive model search over initialization × covariance constraint × k.
//!
//! Every cell of the grid is fitted independently: its hard initial clustering
//! becomes starting parameters for EM, and a singular or singleton-producing fit
//! is retried with increasing diagonal regularization (see [`REG_LADDER`]). The
//! converged cell with the largest criterion value wins.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::gmm::{criterion_value, em_fit, CovarianceConstraint, Criterion, EmSettings, FitResult};
use crate::init::{
    estimate_gaussian_parameters, extend_labels, kmeans_init, subset_data, Dendrogram, InitMethod,
    Subset,
};
use crate::seed::derive_seed;

/// Every regularization value a fit may end up with, in the order they are tried.
pub const REG_LADDER: [f64; 8] = [0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1e0];

/// Largest regularization still attempted.
pub const MAX_REG: f64 = 1.0;

const SUBSET_TASK: u64 = u64::MAX;
const KMEANS_TASK: u64 = 1;

/// Next regularization after `reg`: `0 → 1e-6`, otherwise `× 10`.
///
/// Values on the ladder step to the next exact ladder literal, so repeated
/// stepping never drifts off the decimal powers.
pub fn increase_reg(reg: f64) -> f64 {
    if reg == 0.0 {
        return REG_LADDER[1];
    }
    match REG_LADDER.iter().position(|&r| r == reg) {
        Some(i) if i + 1 < REG_LADDER.len() => REG_LADDER[i + 1],
        _ => reg * 10.0,
    }
}

/// All knobs of a search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    pub kmin: usize,
    pub kmax: usize,
    /// Allowed initializations, any subset of [`InitMethod::ALL`].
    pub methods: Vec<InitMethod>,
    pub constraints: Vec<CovarianceConstraint>,
    pub criterion: Criterion,
    /// Maximum number of rows handed to agglomeration.
    pub subset_cap: usize,
    /// k-means++/Lloyd repetitions for the k-means initialization.
    pub kmeans_reps: usize,
    /// `reg_covar` is ignored here; the ladder supplies it.
    pub em: EmSettings,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            kmin: 2,
            kmax: 20,
            methods: InitMethod::ALL.to_vec(),
            constraints: CovarianceConstraint::ALL.to_vec(),
            criterion: Criterion::Bic,
            subset_cap: 2000,
            kmeans_reps: 1,
            em: EmSettings::default(),
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.kmin == 0 || self.kmin > self.kmax {
            return Err(Error::Input(format!(
                "need 1 <= kmin <= kmax, got kmin={} kmax={}",
                self.kmin, self.kmax
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::Input("no initialization methods selected".into()));
        }
        if self.constraints.is_empty() {
            return Err(Error::Input("no covariance constraints selected".into()));
        }
        for m in &self.methods {
            if let InitMethod::Agglomerative { affinity, linkage } = m {
                InitMethod::agglomerative(*affinity, *linkage)?;
            }
        }
        if self.subset_cap == 0 {
            return Err(Error::Input("subset cap must be at least 1".into()));
        }
        if self.kmeans_reps == 0 {
            return Err(Error::Input("kmeans_reps must be at least 1".into()));
        }
        self.em.validate()
    }

    /// Number of cells the search will evaluate.
    pub fn grid_size(&self) -> usize {
        self.methods.len() * self.constraints.len() * (self.kmax - self.kmin + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateStatus {
    Converged,
    Failed,
}

impl CandidateStatus {
    pub fn name(self) -> &'static str {
        match self {
            CandidateStatus::Converged => "converged",
            CandidateStatus::Failed => "failed",
        }
    }
}

/// One `(init, constraint, k)` cell of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateResult {
    pub method: InitMethod,
    pub constraint: CovarianceConstraint,
    pub k: usize,
    pub status: CandidateStatus,
    /// Present iff converged.
    pub criterion_value: Option<f64>,
    /// Regularization of the accepted fit, or the last one tried on failure.
    pub reg_covar: f64,
    /// Present iff converged.
    pub fit: Option<FitResult>,
    /// Why the cell failed.
    pub failure: Option<String>,
}

impl CandidateResult {
    fn failed(
        method: InitMethod,
        constraint: CovarianceConstraint,
        k: usize,
        reg_covar: f64,
        reason: String,
    ) -> Self {
        Self {
            method,
            constraint,
            k,
            status: CandidateStatus::Failed,
            criterion_value: None,
            reg_covar,
            fit: None,
            failure: Some(reason),
        }
    }

    pub fn is_converged(&self) -> bool {
        self.status == CandidateStatus::Converged
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.fit.as_ref().map(|f| f.labels.as_slice())
    }

    /// Ranking among converged cells: larger criterion first, then smaller k,
    /// simpler constraint, earlier canonical method.
    fn rank(&self, other: &Self) -> Ordering {
        let a = self.criterion_value.unwrap_or(f64::NEG_INFINITY);
        let b = other.criterion_value.unwrap_or(f64::NEG_INFINITY);
        b.total_cmp(&a)
            .then(self.k.cmp(&other.k))
            .then(self.constraint.cmp(&other.constraint))
            .then(
                self.method
                    .canonical_index()
                    .cmp(&other.method.canonical_index()),
            )
    }
}

/// Output of [`autogmm_search`].
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub best: CandidateResult,
    /// Every cell, ordered by k, then method, then constraint as configured.
    pub grid: Vec<CandidateResult>,
    pub criterion: Criterion,
    pub n_samples: usize,
    /// Rows seen by agglomeration, when any agglomerative method ran.
    pub agglomeration_rows: Option<usize>,
}

impl SearchResult {
    pub fn labels(&self) -> &[usize] {
        self.best.labels().expect("best candidate is converged")
    }
}

fn has_singleton(labels: &[usize], k: usize) -> bool {
    let mut counts = vec![0usize; k];
    for &l in labels {
        counts[l] += 1;
    }
    counts.contains(&1)
}

/// Fits one cell, climbing the regularization ladder until EM succeeds without a
/// singleton cluster. Never errors: failures are reported through the status.
///
/// Starting parameters are re-estimated from `init` at every rung. Without
/// `init`, only `k = 1` can be fitted.
pub fn gaussian_cluster(
    data: &DataMatrix,
    k: usize,
    constraint: CovarianceConstraint,
    method: InitMethod,
    init: Option<&[usize]>,
    em: &EmSettings,
    criterion: Criterion,
) -> CandidateResult {
    let n = data.nrows();
    if k == 0 || n < k {
        return CandidateResult::failed(
            method,
            constraint,
            k,
            0.0,
            format!("{n} samples cannot support k={k}"),
        );
    }
    let mut reg = 0.0;
    let mut last_reg = 0.0;
    let mut reason = String::new();
    while reg <= MAX_REG {
        let attempt = (|| -> Result<(FitResult, f64)> {
            let start = match init {
                Some(labels) => Some(
                    estimate_gaussian_parameters(data, labels, k, constraint, reg)?.into_model(),
                ),
                None => None,
            };
            let settings = EmSettings {
                reg_covar: reg,
                ..*em
            };
            let fit = em_fit(data, k, constraint, &settings, start.as_ref())?;
            if has_singleton(&fit.labels, k) {
                return Err(Error::EmFailure("singleton cluster".into()));
            }
            let value = criterion_value(&fit, n, criterion)?;
            Ok((fit, value))
        })();
        match attempt {
            Ok((fit, value)) => {
                return CandidateResult {
                    method,
                    constraint,
                    k,
                    status: CandidateStatus::Converged,
                    criterion_value: Some(value),
                    reg_covar: reg,
                    fit: Some(fit),
                    failure: None,
                };
            }
            // More regularization cannot repair malformed input.
            Err(Error::Input(msg)) => {
                return CandidateResult::failed(method, constraint, k, reg, msg);
            }
            Err(e) => {
                reason = e.to_string();
                last_reg = reg;
                reg = increase_reg(reg);
            }
        }
    }
    CandidateResult::failed(
        method,
        constraint,
        k,
        last_reg,
        format!("no regularization up to {MAX_REG:e} succeeded (last: {reason})"),
    )
}

/// Evaluates every cell of the configured grid and returns the best converged one.
pub fn autogmm_search(data: &DataMatrix, config: &SearchConfig) -> Result<SearchResult> {
    config.validate()?;
    let n = data.nrows();
    if n < 2 {
        return Err(Error::Input(format!("need at least 2 samples, got {n}")));
    }

    let agglomerative: Vec<InitMethod> = config
        .methods
        .iter()
        .copied()
        .filter(|m| matches!(m, InitMethod::Agglomerative { .. }))
        .collect();
    let subset: Option<Subset> = if agglomerative.is_empty() {
        None
    } else {
        Some(subset_data(
            data,
            config.subset_cap,
            derive_seed(config.seed, SUBSET_TASK, 0),
        )?)
    };
    // One hierarchy per method, cut at every k.
    let dendrograms: Vec<(InitMethod, Result<Dendrogram, String>)> = match &subset {
        Some(s) if config.kmax > 1 => agglomerative
            .par_iter()
            .map(|&m| {
                let InitMethod::Agglomerative { affinity, linkage } = m else {
                    unreachable!()
                };
                (
                    m,
                    Dendrogram::build(&s.data, affinity, linkage).map_err(|e| e.to_string()),
                )
            })
            .collect(),
        _ => Vec::new(),
    };

    let jobs: Vec<(usize, InitMethod)> = (config.kmin..=config.kmax)
        .flat_map(|k| config.methods.iter().map(move |&m| (k, m)))
        .collect();

    let cells: Vec<Vec<CandidateResult>> = jobs
        .par_iter()
        .map(|&(k, method)| {
            let labels = initial_labels(data, config, subset.as_ref(), &dendrograms, k, method);
            config
                .constraints
                .iter()
                .map(|&constraint| match &labels {
                    Ok(l) => gaussian_cluster(
                        data,
                        k,
                        constraint,
                        method,
                        Some(l),
                        &config.em,
                        config.criterion,
                    ),
                    Err(reason) => {
                        CandidateResult::failed(method, constraint, k, 0.0, reason.clone())
                    }
                })
                .collect()
        })
        .collect();
    let grid: Vec<CandidateResult> = cells.into_iter().flatten().collect();

    let best = grid
        .iter()
        .filter(|c| c.is_converged())
        .min_by(|a, b| a.rank(b))
        .cloned();
    match best {
        Some(best) => Ok(SearchResult {
            best,
            grid,
            criterion: config.criterion,
            n_samples: n,
            agglomeration_rows: subset.as_ref().map(|s| s.data.nrows()),
        }),
        None => Err(Error::SearchFailure {
            reasons: grid
                .iter()
                .map(|c| {
                    format!(
                        "k={} {} {}: {}",
                        c.k,
                        c.method,
                        c.constraint,
                        c.failure.as_deref().unwrap_or("failed")
                    )
                })
                .collect(),
        }),
    }
}

fn initial_labels(
    data: &DataMatrix,
    config: &SearchConfig,
    subset: Option<&Subset>,
    dendrograms: &[(InitMethod, Result<Dendrogram, String>)],
    k: usize,
    method: InitMethod,
) -> Result<Vec<usize>, String> {
    let n = data.nrows();
    if k > n {
        return Err(format!("{n} samples cannot support k={k}"));
    }
    if k == 1 {
        return Ok(vec![0; n]);
    }
    match method {
        InitMethod::KMeans => {
            // Seeded by (k, method) identity, not grid position, so narrowing the
            // allowed sets never changes the remaining cells.
            let cell = (k as u64) << 8 | method.canonical_index() as u64;
            kmeans_init(
                data,
                k,
                config.kmeans_reps,
                derive_seed(config.seed, cell, KMEANS_TASK),
            )
            .map_err(|e| e.to_string())
        }
        InitMethod::Agglomerative { .. } => {
            let subset = subset.expect("subset drawn for agglomerative methods");
            let dendrogram = dendrograms
                .iter()
                .find(|(m, _)| *m == method)
                .map(|(_, d)| d)
                .expect("dendrogram built for every agglomerative method");
            let dendrogram = dendrogram.as_ref().map_err(Clone::clone)?;
            let labels = dendrogram.cut(k).map_err(|e| e.to_string())?;
            Ok(extend_labels(data, subset, &labels, k))
        }
    }
}
