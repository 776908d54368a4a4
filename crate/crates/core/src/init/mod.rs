//! Initial hard clusterings and their conversion to starting mixture parameters.

mod agglomerative;
mod kmeans;

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

pub use agglomerative::{agglomerate, Dendrogram};
pub use kmeans::kmeans_init;

use crate::data::{squared_euclidean, DataMatrix};
use crate::error::{Error, Result};
use crate::gmm::{
    hard_responsibilities, m_step, spd_cholesky, CovarianceConstraint, Covariances, GmmModel,
};
use crate::seed::rng_from_seed;

/// Pairwise dissimilarity used by agglomeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Affinity {
    L2,
    L1,
    /// `1 − x·y / (‖x‖‖y‖)`
    Cosine,
}

impl Affinity {
    pub fn name(self) -> &'static str {
        match self {
            Affinity::L2 => "l2",
            Affinity::L1 => "l1",
            Affinity::Cosine => "cosine",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Linkage {
    Ward,
    Complete,
    Average,
    Single,
}

impl Linkage {
    pub const ALL: [Linkage; 4] = [
        Linkage::Ward,
        Linkage::Complete,
        Linkage::Average,
        Linkage::Single,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Linkage::Ward => "ward",
            Linkage::Complete => "complete",
            Linkage::Average => "average",
            Linkage::Single => "single",
        }
    }
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ward" => Ok(Linkage::Ward),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            "single" => Ok(Linkage::Single),
            other => Err(Error::Input(format!("unknown linkage `{other}`"))),
        }
    }
}

/// How the initial hard clustering of a search cell is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InitMethod {
    Agglomerative {
        affinity: Affinity,
        linkage: Linkage,
    },
    /// k-means++ seeding followed by Lloyd iterations (the `none` affinity).
    KMeans,
}

impl InitMethod {
    /// Every valid method, in canonical order.
    pub const ALL: [InitMethod; 11] = [
        InitMethod::agg(Affinity::L2, Linkage::Ward),
        InitMethod::agg(Affinity::L2, Linkage::Complete),
        InitMethod::agg(Affinity::L2, Linkage::Average),
        InitMethod::agg(Affinity::L2, Linkage::Single),
        InitMethod::agg(Affinity::L1, Linkage::Complete),
        InitMethod::agg(Affinity::L1, Linkage::Average),
        InitMethod::agg(Affinity::L1, Linkage::Single),
        InitMethod::agg(Affinity::Cosine, Linkage::Complete),
        InitMethod::agg(Affinity::Cosine, Linkage::Average),
        InitMethod::agg(Affinity::Cosine, Linkage::Single),
        InitMethod::KMeans,
    ];

    const fn agg(affinity: Affinity, linkage: Linkage) -> Self {
        InitMethod::Agglomerative { affinity, linkage }
    }

    /// Validated constructor: ward only pairs with L2.
    pub fn agglomerative(affinity: Affinity, linkage: Linkage) -> Result<Self> {
        if linkage == Linkage::Ward && affinity != Affinity::L2 {
            return Err(Error::Input(format!(
                "ward linkage requires l2 affinity, got {}",
                affinity.name()
            )));
        }
        Ok(Self::agg(affinity, linkage))
    }

    /// Position in [`InitMethod::ALL`].
    pub fn canonical_index(self) -> usize {
        Self::ALL
            .iter()
            .position(|m| *m == self)
            .expect("valid method")
    }

    pub fn affinity_name(self) -> &'static str {
        match self {
            InitMethod::Agglomerative { affinity, .. } => affinity.name(),
            InitMethod::KMeans => "none",
        }
    }

    pub fn linkage_name(self) -> Option<&'static str> {
        match self {
            InitMethod::Agglomerative { linkage, .. } => Some(linkage.name()),
            InitMethod::KMeans => None,
        }
    }

    /// All valid methods built from affinity and linkage subsets; `None` in
    /// `affinities` selects k-means. Ward is silently skipped for non-L2 affinities.
    pub fn from_sets(affinities: &[Option<Affinity>], linkages: &[Linkage]) -> Vec<InitMethod> {
        Self::ALL
            .iter()
            .copied()
            .filter(|m| match m {
                InitMethod::Agglomerative { affinity, linkage } => {
                    affinities.contains(&Some(*affinity)) && linkages.contains(linkage)
                }
                InitMethod::KMeans => affinities.contains(&None),
            })
            .collect()
    }
}

impl fmt::Display for InitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.linkage_name() {
            Some(l) => write!(f, "{}/{}", self.affinity_name(), l),
            None => f.write_str("none"),
        }
    }
}

/// Parses an affinity name; `none` (k-means) maps to `Ok(None)`.
pub fn parse_affinity(s: &str) -> Result<Option<Affinity>> {
    match s.trim().to_ascii_lowercase().as_str() {
        "l2" | "euclidean" => Ok(Some(Affinity::L2)),
        "l1" | "manhattan" => Ok(Some(Affinity::L1)),
        "cosine" => Ok(Some(Affinity::Cosine)),
        "none" | "kmeans" => Ok(None),
        other => Err(Error::Input(format!("unknown affinity `{other}`"))),
    }
}

/// Rows kept after subsetting, and their indices into the original matrix.
#[derive(Debug, Clone)]
pub struct Subset {
    pub data: DataMatrix,
    /// Ascending original row indices, or `None` when nothing was dropped.
    pub indices: Option<Vec<usize>>,
}

/// Samples `cap` rows uniformly without replacement when there are more than
/// `cap`; the original row order is preserved.
pub fn subset_data(data: &DataMatrix, cap: usize, seed: u64) -> Result<Subset> {
    if cap == 0 {
        return Err(Error::Input("subset cap must be at least 1".into()));
    }
    if data.nrows() <= cap {
        return Ok(Subset {
            data: data.clone(),
            indices: None,
        });
    }
    let mut rng = rng_from_seed(seed);
    let mut indices = index::sample(&mut rng, data.nrows(), cap).into_vec();
    indices.sort_unstable();
    Ok(Subset {
        data: data.select_rows(&indices),
        indices: Some(indices),
    })
}

/// Extends a labeling of subset rows to every row: subset rows keep their label,
/// every other row joins the cluster with the nearest (Euclidean) mean.
pub fn extend_labels(data: &DataMatrix, subset: &Subset, labels: &[usize], k: usize) -> Vec<usize> {
    let Some(indices) = &subset.indices else {
        return labels.to_vec();
    };
    let d = data.ncols();
    let mut means = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (row, &l) in subset.data.rows().zip(labels) {
        counts[l] += 1;
        for (m, x) in means[l].iter_mut().zip(row) {
            *m += x;
        }
    }
    for (m, &c) in means.iter_mut().zip(&counts) {
        m.iter_mut().for_each(|v| *v /= c.max(1) as f64);
    }
    let mut out = vec![usize::MAX; data.nrows()];
    for (&i, &l) in indices.iter().zip(labels) {
        out[i] = l;
    }
    for (i, slot) in out.iter_mut().enumerate() {
        if *slot == usize::MAX {
            let x = data.row(i);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, m) in means.iter().enumerate() {
                let dist = squared_euclidean(x, m);
                if counts[j] > 0 && dist < best_d {
                    best_d = dist;
                    best = j;
                }
            }
            *slot = best;
        }
    }
    out
}

/// Starting parameters estimated from a hard labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct InitParams {
    pub weights: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    /// Inverse covariances, in the same constraint-shaped storage as covariances.
    pub precisions: Covariances,
    model: GmmModel,
}

impl InitParams {
    /// The starting mixture (covariance parameterization) for EM.
    pub fn model(&self) -> &GmmModel {
        &self.model
    }

    pub fn into_model(self) -> GmmModel {
        self.model
    }
}

/// Per-cluster weight, mean and constraint-shaped covariance (with `reg_covar` on
/// the diagonal) of a hard labeling with `k` clusters, plus the precisions.
pub fn estimate_gaussian_parameters(
    data: &DataMatrix,
    labels: &[usize],
    k: usize,
    constraint: CovarianceConstraint,
    reg_covar: f64,
) -> Result<InitParams> {
    if labels.len() != data.nrows() {
        return Err(Error::Input(format!(
            "{} labels for {} samples",
            labels.len(),
            data.nrows()
        )));
    }
    let mut counts = vec![0usize; k];
    for &l in labels {
        if l >= k {
            return Err(Error::Input(format!("label {l} out of range for k={k}")));
        }
        counts[l] += 1;
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Input(format!("cluster {empty} has no members")));
    }
    let model = m_step(
        data,
        &hard_responsibilities(labels, k),
        k,
        constraint,
        reg_covar,
    )?;
    let precisions = invert(model.covariances(), model.d()).ok_or_else(|| {
        Error::InitFailure(format!(
            "{constraint} covariance is singular at reg_covar={reg_covar:e}"
        ))
    })?;
    Ok(InitParams {
        weights: model.weights().to_vec(),
        means: model.means().to_vec(),
        precisions,
        model,
    })
}

fn invert(cov: &Covariances, d: usize) -> Option<Covariances> {
    let positive = |v: &f64| v.is_finite() && *v > 0.0;
    let inv_matrix = |m: &[f64]| -> Option<Vec<f64>> {
        let chol = spd_cholesky(m, d)?;
        let inv = chol.inverse();
        if inv.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(inv.transpose().as_slice().to_vec())
    };
    Some(match cov {
        Covariances::Full(ms) => {
            Covariances::Full(ms.iter().map(|m| inv_matrix(m)).collect::<Option<_>>()?)
        }
        Covariances::Tied(m) => Covariances::Tied(inv_matrix(m)?),
        Covariances::Diag(vs) => {
            if !vs.iter().flatten().all(positive) {
                return None;
            }
            Covariances::Diag(
                vs.iter()
                    .map(|v| v.iter().map(|x| 1.0 / x).collect())
                    .collect(),
            )
        }
        Covariances::Spherical(v) => {
            if !v.iter().all(positive) {
                return None;
            }
            Covariances::Spherical(v.iter().map(|x| 1.0 / x).collect())
        }
    })
}
