// SPDX-License-Identifier: Apache-2.0

//! Node sampling that mimics structural approximation: selected nodes are
//! deleted together with the fan-in logic that exists only to feed them.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{CircuitGraph, FeatureLayout, GraphError, GraphNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    Random,
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub mode: SamplingMode,
    /// Number of initially selected nodes; a proxy for approximation level.
    pub num_selected: usize,
    pub seed: u64,
    /// Recompute survivor features from the sampled structure instead of
    /// keeping the rows of the source graph.
    #[serde(default)]
    pub recompute_features: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error("no nodes selected")]
    EmptySelection,
    #[error("node {0} is not in the graph")]
    NodeOutOfRange(usize),
    #[error("node {0} selected twice")]
    DuplicateSelection(usize),
    #[error("cannot select {requested} nodes from {available} candidates")]
    TooMany { requested: usize, available: usize },
    #[error("graph has no leaf nodes")]
    NoLeaves,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Names of the nodes involved in one sampling run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovalReport {
    pub selected: Vec<String>,
    pub removed: Vec<String>,
    pub added: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SampledGraph {
    pub graph: CircuitGraph,
    pub report: RemovalReport,
}

/// Fan-in nodes exclusive to `c`: every proper ancestor `p` of `c` with
/// out-degree 1 whose single out-edge chain reaches `c` through nodes that
/// all have out-degree 1. `c` itself is never included. Returned sorted.
pub fn find_datapath(g: &CircuitGraph, c: usize) -> Vec<usize> {
    let mut visited = vec![false; g.len()];
    visited[c] = true;
    let mut stack = vec![c];
    let mut path = Vec::new();
    while let Some(v) = stack.pop() {
        for &p in g.predecessors(v) {
            if visited[p] {
                continue;
            }
            visited[p] = true;
            if g.out_degree(p) == 1 {
                path.push(p);
                stack.push(p);
            }
        }
    }
    path.sort_unstable();
    path
}

/// Nodes with output degree 0, in index order.
pub fn identify_leaf_nodes(g: &CircuitGraph) -> Vec<usize> {
    (0..g.len()).filter(|&v| g.out_degree(v) == 0).collect()
}

fn check_selection(g: &CircuitGraph, selected: &[usize]) -> Result<(), SampleError> {
    if selected.is_empty() {
        return Err(SampleError::EmptySelection);
    }
    let mut seen = vec![false; g.len()];
    for &s in selected {
        if s >= g.len() {
            return Err(SampleError::NodeOutOfRange(s));
        }
        if std::mem::replace(&mut seen[s], true) {
            return Err(SampleError::DuplicateSelection(s));
        }
    }
    Ok(())
}

/// Mask of the nodes removed when sampling `selected`: each selected node
/// plus its datapath, all computed on the unmodified graph.
pub fn removal_mask(g: &CircuitGraph, selected: &[usize]) -> Vec<bool> {
    let mut drop = vec![false; g.len()];
    for &s in selected {
        drop[s] = true;
        for p in find_datapath(g, s) {
            drop[p] = true;
        }
    }
    drop
}

fn finish(
    g: &CircuitGraph,
    drop: &[bool],
    selected: &[usize],
    recompute: bool,
) -> (CircuitGraph, RemovalReport) {
    let keep: Vec<usize> = (0..g.len()).filter(|&v| !drop[v]).collect();
    let mut out = g.induced_subgraph(&keep);
    if recompute {
        out.recompute_features();
    }
    let report = RemovalReport {
        selected: selected.iter().map(|&v| g.node(v).name.clone()).collect(),
        removed: (0..g.len()).filter(|&v| drop[v]).map(|v| g.node(v).name.clone()).collect(),
        added: Vec::new(),
    };
    (out, report)
}

/// Remove every selected node together with its datapath. Survivors keep
/// their original feature rows.
pub fn sample_graph(g: &CircuitGraph, selected: &[usize]) -> Result<SampledGraph, SampleError> {
    check_selection(g, selected)?;
    let drop = removal_mask(g, selected);
    let (graph, report) = finish(g, &drop, selected, false);
    Ok(SampledGraph { graph, report })
}

fn choose(rng: &mut ChaCha8Rng, candidates: &[usize], n: usize) -> Result<Vec<usize>, SampleError> {
    if n == 0 {
        return Err(SampleError::EmptySelection);
    }
    if n > candidates.len() {
        return Err(SampleError::TooMany { requested: n, available: candidates.len() });
    }
    Ok(index::sample(rng, candidates.len(), n)
        .into_iter()
        .map(|i| candidates[i])
        .collect())
}

/// Remove `num_selected` uniformly chosen nodes and their datapaths.
pub fn random_node_sampling(g: &CircuitGraph, cfg: &SamplingConfig) -> Result<SampledGraph, SampleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let all: Vec<usize> = (0..g.len()).collect();
    let selected = choose(&mut rng, &all, cfg.num_selected)?;
    let drop = removal_mask(g, &selected);
    let (graph, report) = finish(g, &drop, &selected, cfg.recompute_features);
    Ok(SampledGraph { graph, report })
}

/// Raw feature row of a leaf replacement: a `BUF` that is both primary
/// input and primary output with unit in- and out-degree.
pub fn replacement_features(layout: FeatureLayout, buf: usize) -> Vec<f64> {
    let mut x = vec![0.0; layout.dim()];
    x[FeatureLayout::IS_PI] = 1.0;
    x[FeatureLayout::IS_PO] = 1.0;
    x[layout.cell_type().start + buf] = 1.0;
    x[layout.in_degree()] = 1.0;
    x[layout.out_degree()] = 1.0;
    x
}

/// Remove `num_selected` uniformly chosen leaves with their datapaths and
/// put one isolated `BUF` node in place of each removed leaf.
///
/// Logic left without any sink by the removal is swept as well, so no
/// surviving node turns into a new leaf and the leaf count is preserved.
pub fn leaf_node_sampling(g: &CircuitGraph, cfg: &SamplingConfig) -> Result<SampledGraph, SampleError> {
    let buf = g.buf_id()?;
    let leaves = identify_leaf_nodes(g);
    if leaves.is_empty() {
        return Err(SampleError::NoLeaves);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let selected = choose(&mut rng, &leaves, cfg.num_selected)?;
    let mut drop = removal_mask(g, &selected);
    sweep_dead_logic(g, &mut drop);
    let (mut graph, mut report) = finish(g, &drop, &selected, cfg.recompute_features);

    let row = replacement_features(graph.layout(), buf);
    for &leaf in &selected {
        let src = g.node(leaf);
        let name = format!("{}_rep", src.name);
        graph.push_isolated(
            GraphNode {
                name: name.clone(),
                cell: buf,
                label: src.label,
                pi_inputs: 1,
                const_inputs: 0,
                po_outputs: 1,
            },
            &row,
        );
        report.added.push(name);
    }
    Ok(SampledGraph { graph, report })
}

/// Extend `drop` with surviving nodes whose every successor is dropped.
fn sweep_dead_logic(g: &CircuitGraph, drop: &mut [bool]) {
    let mut live_sinks: Vec<usize> = (0..g.len())
        .map(|v| g.successors(v).iter().filter(|&&s| !drop[s]).count())
        .collect();
    let mut stack: Vec<usize> = (0..g.len())
        .filter(|&v| !drop[v] && g.out_degree(v) > 0 && live_sinks[v] == 0)
        .collect();
    while let Some(v) = stack.pop() {
        if drop[v] {
            continue;
        }
        drop[v] = true;
        for &p in g.predecessors(v) {
            if !drop[p] {
                live_sinks[p] -= 1;
                if live_sinks[p] == 0 {
                    stack.push(p);
                }
            }
        }
    }
}

pub fn sample(g: &CircuitGraph, cfg: &SamplingConfig) -> Result<SampledGraph, SampleError> {
    match cfg.mode {
        SamplingMode::Random => random_node_sampling(g, cfg),
        SamplingMode::Leaf => leaf_node_sampling(g, cfg),
    }
}

#[cfg(test)]
pub(crate) mod tests;
