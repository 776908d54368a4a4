//! Hierarchical mixture modeling: the model search applied recursively to
//! every discovered cluster until each branch ends in a leaf.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::gmm::{CovarianceConstraint, GmmModel};
use crate::init::InitMethod;
use crate::search::{autogmm_search, SearchConfig};
use crate::seed::derive_seed;

const CHILD_SEED_TASK: u64 = 3;

#[derive(Debug, Clone)]
pub struct HgmmConfig {
    /// Search settings for every node; `kmin` and `kmax` are overridden with
    /// `1` and `max_components`.
    pub search: SearchConfig,
    pub max_components: usize,
    /// Nodes with fewer points become leaves without a search.
    /// `None` means `2 × max_components`.
    pub min_split: Option<usize>,
    /// Nodes at this depth become leaves without a search. `None` is unbounded.
    pub max_depth: Option<usize>,
}

impl Default for HgmmConfig {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            max_components: 2,
            min_split: None,
            max_depth: None,
        }
    }
}

impl HgmmConfig {
    pub fn effective_min_split(&self) -> usize {
        self.min_split.unwrap_or(2 * self.max_components)
    }

    fn node_search(&self, seed: u64) -> SearchConfig {
        SearchConfig {
            kmin: 1,
            kmax: self.max_components,
            seed,
            ..self.search.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_components < 2 {
            return Err(Error::Input(format!(
                "max_components must be at least 2, got {}",
                self.max_components
            )));
        }
        if self.effective_min_split() == 0 {
            return Err(Error::Input("min_split must be at least 1".into()));
        }
        self.node_search(self.search.seed).validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafReason {
    /// The search preferred a single component.
    K1,
    /// Too few points to attempt a split.
    MinSplit,
    /// Every cell of the node's search failed.
    SearchFailure,
    /// The configured depth cap was reached.
    MaxDepth,
}

impl LeafReason {
    pub fn name(self) -> &'static str {
        match self {
            LeafReason::K1 => "k1",
            LeafReason::MinSplit => "min_split",
            LeafReason::SearchFailure => "search_failure",
            LeafReason::MaxDepth => "max_depth",
        }
    }
}

/// The model selected for a node's data.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeModel {
    pub model: GmmModel,
    pub method: InitMethod,
    pub constraint: CovarianceConstraint,
    pub criterion_value: f64,
    pub reg_covar: f64,
    /// Seed of the node's search.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DendrogramNode {
    /// Member rows of the root matrix, ascending.
    pub indices: Vec<usize>,
    pub depth: usize,
    /// Absent when no search ran (size or depth guard) or the search failed.
    pub model: Option<NodeModel>,
    /// Ordered by smallest member index.
    pub children: Vec<DendrogramNode>,
    /// `None` for internal nodes.
    pub leaf_reason: Option<LeafReason>,
    pub failure: Option<String>,
}

impl DendrogramNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    /// Depth of the deepest leaf below this node, counted from the root.
    pub fn max_depth(&self) -> usize {
        self.children
            .iter()
            .map(DendrogramNode::max_depth)
            .max()
            .unwrap_or(self.depth)
    }

    pub fn leaves(&self) -> Vec<&DendrogramNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(node) = stack.pop() {
            if node.is_leaf() {
                out.push(node);
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
        out
    }
}

/// Builds the cluster dendrogram of `data`.
pub fn hgmm_fit(data: &DataMatrix, config: &HgmmConfig) -> Result<DendrogramNode> {
    config.validate()?;
    if data.nrows() == 0 {
        return Err(Error::Input("no samples".into()));
    }
    let indices: Vec<usize> = (0..data.nrows()).collect();
    Ok(fit_node(data, config, indices, 0, config.search.seed))
}

fn leaf(indices: Vec<usize>, depth: usize, reason: LeafReason) -> DendrogramNode {
    DendrogramNode {
        indices,
        depth,
        model: None,
        children: Vec::new(),
        leaf_reason: Some(reason),
        failure: None,
    }
}

fn fit_node(
    data: &DataMatrix,
    config: &HgmmConfig,
    indices: Vec<usize>,
    depth: usize,
    seed: u64,
) -> DendrogramNode {
    if config.max_depth.is_some_and(|m| depth >= m) {
        return leaf(indices, depth, LeafReason::MaxDepth);
    }
    if indices.len() < config.effective_min_split() {
        return leaf(indices, depth, LeafReason::MinSplit);
    }
    let rows = data.select_rows(&indices);
    let result = match autogmm_search(&rows, &config.node_search(seed)) {
        Ok(r) => r,
        Err(e) => {
            let mut node = leaf(indices, depth, LeafReason::SearchFailure);
            node.failure = Some(e.to_string());
            return node;
        }
    };
    let best = &result.best;
    let model = NodeModel {
        model: best
            .fit
            .as_ref()
            .expect("best candidate is converged")
            .model
            .clone(),
        method: best.method,
        constraint: best.constraint,
        criterion_value: best.criterion_value.expect("best candidate has a value"),
        reg_covar: best.reg_covar,
        seed,
    };

    // Groups in order of their smallest member; empty components vanish.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; best.k];
    for (&row, &label) in indices.iter().zip(result.labels()) {
        if slot[label] == usize::MAX {
            slot[label] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[label]].push(row);
    }
    if groups.len() < 2 {
        let mut node = leaf(indices, depth, LeafReason::K1);
        node.model = Some(model);
        return node;
    }
    let children: Vec<DendrogramNode> = groups
        .into_par_iter()
        .enumerate()
        .map(|(i, group)| {
            fit_node(
                data,
                config,
                group,
                depth + 1,
                derive_seed(seed, i as u64, CHILD_SEED_TASK),
            )
        })
        .collect();
    DendrogramNode {
        indices,
        depth,
        model: Some(model),
        children,
        leaf_reason: None,
        failure: None,
    }
}

/// Flat clustering keeping every branch down to at most `depth`.
///
/// Cluster labels are numbered by smallest member index.
pub fn cut_at_depth(root: &DendrogramNode, depth: usize) -> Vec<usize> {
    let mut clusters: Vec<&[usize]> = Vec::new();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if node.is_leaf() || node.depth >= depth {
            clusters.push(&node.indices);
        } else {
            stack.extend(node.children.iter());
        }
    }
    clusters.sort_by_key(|c| c.iter().min().copied());
    let n = root.indices.iter().max().map_or(0, |m| m + 1);
    let mut labels = vec![0; n];
    for (label, members) in clusters.iter().enumerate() {
        for &i in *members {
            labels[i] = label;
        }
    }
    labels
}
