// SPDX-License-Identifier: Apache-2.0

//! Directed circuit graphs: one node per gate, an edge `u -> v` whenever
//! the output net of `u` feeds an input pin of `v`.

mod features;
mod json;
mod standardize;

use std::collections::BTreeSet;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::netlist::{CellLibrary, Driver, Netlist, BUF_CELL};

pub use features::FeatureLayout;
pub use json::{GraphJson, GraphJsonError, NodeJson};
pub use standardize::{StandardizeError, Standardizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    /// Instance name of the gate.
    pub name: String,
    /// Index into the library's cell list.
    pub cell: usize,
    pub label: Option<usize>,
    /// Distinct primary-input nets read by this gate.
    pub pi_inputs: u32,
    /// Distinct constant nets read by this gate.
    pub const_inputs: u32,
    /// 1 when the gate drives a primary output.
    pub po_outputs: u32,
}

impl GraphNode {
    pub fn is_pi(&self) -> bool {
        self.pi_inputs > 0
    }

    pub fn is_po(&self) -> bool {
        self.po_outputs > 0
    }
}

/// Provenance carried along with a graph through sampling and training.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized_area: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitGraph {
    pub name: String,
    pub meta: GraphMeta,
    cells: Vec<String>,
    nodes: Vec<GraphNode>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
    /// Undirected neighbourhood (union of `succ` and `pred`, minus self).
    adj: Vec<Vec<usize>>,
    /// Raw (unstandardized) feature rows; survives sampling unchanged.
    features: Array2<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("edge ({0}, {1}) references a node outside the graph")]
    EdgeOutOfRange(usize, usize),
    #[error("node {node} uses cell id {cell} but the library has {cells} cells")]
    CellOutOfRange { node: usize, cell: usize, cells: usize },
    #[error("feature matrix is {rows}x{cols}, expected {n}x{d}")]
    FeatureShape { rows: usize, cols: usize, n: usize, d: usize },
    #[error("the cell list has no `{BUF_CELL}` cell")]
    MissingBuf,
}

fn sorted_unique(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Convert a validated netlist into its graph. Node order equals gate order.
pub fn build_graph(netlist: &Netlist, lib: &CellLibrary) -> CircuitGraph {
    let n = netlist.gates.len();
    let is_po: Vec<bool> = {
        let mut v = vec![false; netlist.nets.len()];
        for &po in &netlist.primary_outputs {
            v[po] = true;
        }
        v
    };
    let mut nodes = Vec::with_capacity(n);
    let mut edges = Vec::new();
    for (g, gate) in netlist.gates.iter().enumerate() {
        let mut pis = BTreeSet::new();
        let mut consts = BTreeSet::new();
        for &net in &gate.inputs {
            match netlist.driver(net) {
                Driver::Input => {
                    pis.insert(net);
                }
                Driver::Constant(_) => {
                    consts.insert(net);
                }
                Driver::Gate(src) => edges.push((src, g)),
                Driver::Undriven => unreachable!("validated netlists read only driven nets"),
            }
        }
        nodes.push(GraphNode {
            name: gate.name.clone(),
            cell: gate.cell,
            label: gate.label,
            pi_inputs: pis.len() as u32,
            const_inputs: consts.len() as u32,
            po_outputs: is_po[gate.output] as u32,
        });
    }
    CircuitGraph::from_structure(netlist.name.clone(), lib.names(), nodes, &edges)
        .expect("netlist-derived graphs are well formed")
}

impl CircuitGraph {
    /// Assemble a graph and compute its raw features from structure.
    pub fn from_structure(
        name: String,
        cells: Vec<String>,
        nodes: Vec<GraphNode>,
        edges: &[(usize, usize)],
    ) -> Result<Self, GraphError> {
        let d = FeatureLayout::new(cells.len()).dim();
        let mut g = Self::with_features(name, cells, nodes, edges, Array2::zeros((0, d)), false)?;
        g.recompute_features();
        Ok(g)
    }

    /// Assemble a graph around an existing feature matrix.
    pub fn from_parts(
        name: String,
        cells: Vec<String>,
        nodes: Vec<GraphNode>,
        edges: &[(usize, usize)],
        features: Array2<f64>,
    ) -> Result<Self, GraphError> {
        Self::with_features(name, cells, nodes, edges, features, true)
    }

    fn with_features(
        name: String,
        cells: Vec<String>,
        nodes: Vec<GraphNode>,
        edges: &[(usize, usize)],
        features: Array2<f64>,
        check_shape: bool,
    ) -> Result<Self, GraphError> {
        let n = nodes.len();
        for (i, node) in nodes.iter().enumerate() {
            if node.cell >= cells.len() {
                return Err(GraphError::CellOutOfRange { node: i, cell: node.cell, cells: cells.len() });
            }
        }
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::EdgeOutOfRange(u, v));
            }
            succ[u].push(v);
            pred[v].push(u);
        }
        let succ: Vec<Vec<usize>> = succ.into_iter().map(sorted_unique).collect();
        let pred: Vec<Vec<usize>> = pred.into_iter().map(sorted_unique).collect();
        let adj = (0..n)
            .map(|v| {
                let mut a: Vec<usize> = succ[v].iter().chain(&pred[v]).copied().filter(|&u| u != v).collect();
                a.sort_unstable();
                a.dedup();
                a
            })
            .collect();
        let d = FeatureLayout::new(cells.len()).dim();
        if check_shape && features.dim() != (n, d) {
            return Err(GraphError::FeatureShape {
                rows: features.nrows(),
                cols: features.ncols(),
                n,
                d,
            });
        }
        let features = if check_shape { features } else { Array2::zeros((n, d)) };
        Ok(Self { name, meta: GraphMeta::default(), cells, nodes, succ, pred, adj, features })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cells(&self) -> &[String] {
        &self.cells
    }

    pub fn layout(&self) -> FeatureLayout {
        FeatureLayout::new(self.cells.len())
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn node(&self, v: usize) -> &GraphNode {
        &self.nodes[v]
    }

    pub fn set_label(&mut self, v: usize, label: Option<usize>) {
        self.nodes[v].label = label;
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn predecessors(&self, v: usize) -> &[usize] {
        &self.pred[v]
    }

    /// Neighbours ignoring edge direction, sorted, without `v` itself.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.succ[v].len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.pred[v].len()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, s)| s.iter().map(move |&v| (u, v)))
            .collect()
    }

    pub fn num_edges(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn cell_id(&self, name: &str) -> Option<usize> {
        self.cells.iter().position(|c| c == name)
    }

    pub fn buf_id(&self) -> Result<usize, GraphError> {
        self.cell_id(BUF_CELL).ok_or(GraphError::MissingBuf)
    }

    pub fn labels(&self) -> Vec<Option<usize>> {
        self.nodes.iter().map(|n| n.label).collect()
    }

    /// Recompute every feature row from the current structure.
    pub fn recompute_features(&mut self) {
        let rows: Vec<Vec<f64>> = (0..self.len()).map(|v| self.feature_vector(v)).collect();
        let d = self.layout().dim();
        self.features = Array2::from_shape_vec((rows.len(), d), rows.concat()).expect("row length is d");
    }

    /// Node-induced subgraph on `keep` (in the given order). Feature rows
    /// are copied, not recomputed.
    pub fn induced_subgraph(&self, keep: &[usize]) -> CircuitGraph {
        let mut map = vec![usize::MAX; self.len()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let nodes = keep.iter().map(|&v| self.nodes[v].clone()).collect();
        let mut edges = Vec::new();
        for &u in keep {
            for &v in &self.succ[u] {
                if map[v] != usize::MAX {
                    edges.push((map[u], map[v]));
                }
            }
        }
        let features = self.features.select(Axis(0), keep);
        let mut g = Self::from_parts(self.name.clone(), self.cells.clone(), nodes, &edges, features)
            .expect("induced subgraph of a valid graph is valid");
        g.meta = self.meta.clone();
        g
    }

    /// Append an edge-free node with a caller-provided raw feature row.
    pub fn push_isolated(&mut self, node: GraphNode, feature_row: &[f64]) {
        assert_eq!(feature_row.len(), self.layout().dim());
        self.nodes.push(node);
        self.succ.push(Vec::new());
        self.pred.push(Vec::new());
        self.adj.push(Vec::new());
        self.features
            .push_row(ndarray::ArrayView1::from(feature_row))
            .expect("row length checked");
    }

    /// Disjoint union of graphs sharing one cell list. Node `i` of the
    /// `k`-th graph lands at `offsets[k] + i`.
    pub fn disjoint_union(name: &str, graphs: &[&CircuitGraph]) -> (CircuitGraph, Vec<usize>) {
        let cells = graphs.first().map(|g| g.cells.clone()).unwrap_or_default();
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        let mut offsets = Vec::with_capacity(graphs.len());
        let d = FeatureLayout::new(cells.len()).dim();
        let mut rows = Vec::new();
        for g in graphs {
            assert_eq!(g.cells, cells, "graphs in a union must share a library");
            let off = nodes.len();
            offsets.push(off);
            nodes.extend(g.nodes.iter().cloned());
            edges.extend(g.edges().into_iter().map(|(u, v)| (u + off, v + off)));
            rows.extend(g.features.iter().copied());
        }
        let features = Array2::from_shape_vec((nodes.len(), d), rows).expect("rows are d wide");
        let g = Self::from_parts(name.to_string(), cells, nodes, &edges, features)
            .expect("union of valid graphs is valid");
        (g, offsets)
    }
}
