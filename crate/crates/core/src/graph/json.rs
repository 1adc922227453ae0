// SPDX-License-Identifier: Apache-2.0

//! Graph interchange format.
//!
//! ```json
//! {"name": "...", "library": ["INV", ...],
//!  "nodes": [{"id": 0, "name": "U1", "cell": "XOR2", "label": "adder",
//!             "is_pi": true, "is_po": false, ...}],
//!  "edges": [[0, 3]], "features": [[...]]}
//! ```

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{CircuitGraph, GraphError, GraphMeta, GraphNode};
use crate::classes::ClassMap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeJson {
    pub id: usize,
    pub name: String,
    pub cell: String,
    pub label: Option<String>,
    pub is_pi: bool,
    pub is_po: bool,
    #[serde(default)]
    pub pi_inputs: u32,
    #[serde(default)]
    pub const_inputs: u32,
    #[serde(default)]
    pub po_outputs: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub name: String,
    #[serde(default, skip_serializing_if = "is_default_meta")]
    pub meta: GraphMeta,
    pub library: Vec<String>,
    pub nodes: Vec<NodeJson>,
    pub edges: Vec<[usize; 2]>,
    pub features: Vec<Vec<f64>>,
}

fn is_default_meta(m: &GraphMeta) -> bool {
    *m == GraphMeta::default()
}

#[derive(Debug, thiserror::Error)]
pub enum GraphJsonError {
    #[error("node {id}: unknown cell `{cell}`")]
    UnknownCell { id: usize, cell: String },
    #[error("node {id}: class `{class}` is not in the class map")]
    UnknownClass { id: usize, class: String },
    #[error("node ids must be 0..n in order (found {found} at position {pos})")]
    NodeOrder { pos: usize, found: usize },
    #[error("feature rows have inconsistent length")]
    Ragged,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GraphJson {
    pub fn from_graph(g: &CircuitGraph, classes: &ClassMap) -> Self {
        let nodes = g
            .nodes()
            .iter()
            .enumerate()
            .map(|(id, n)| NodeJson {
                id,
                name: n.name.clone(),
                cell: g.cells()[n.cell].clone(),
                label: n.label.map(|l| classes.name(l).to_string()),
                is_pi: n.is_pi(),
                is_po: n.is_po(),
                pi_inputs: n.pi_inputs,
                const_inputs: n.const_inputs,
                po_outputs: n.po_outputs,
            })
            .collect();
        Self {
            name: g.name.clone(),
            meta: g.meta.clone(),
            library: g.cells().to_vec(),
            nodes,
            edges: g.edges().into_iter().map(|(u, v)| [u, v]).collect(),
            features: g.features().rows().into_iter().map(|r| r.to_vec()).collect(),
        }
    }

    pub fn into_graph(self, classes: &ClassMap) -> Result<CircuitGraph, GraphJsonError> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (pos, n) in self.nodes.into_iter().enumerate() {
            if n.id != pos {
                return Err(GraphJsonError::NodeOrder { pos, found: n.id });
            }
            let cell = self
                .library
                .iter()
                .position(|c| *c == n.cell)
                .ok_or_else(|| GraphJsonError::UnknownCell { id: n.id, cell: n.cell.clone() })?;
            let label = match n.label {
                Some(class) => Some(
                    classes
                        .id(&class)
                        .ok_or(GraphJsonError::UnknownClass { id: n.id, class })?,
                ),
                None => None,
            };
            // files written by other tools may carry only the flags
            let pi_inputs = if n.pi_inputs == 0 && n.is_pi { 1 } else { n.pi_inputs };
            let po_outputs = if n.po_outputs == 0 && n.is_po { 1 } else { n.po_outputs };
            nodes.push(GraphNode {
                name: n.name,
                cell,
                label,
                pi_inputs,
                const_inputs: n.const_inputs,
                po_outputs,
            });
        }
        let d = self.features.first().map_or(0, Vec::len);
        if self.features.iter().any(|r| r.len() != d) {
            return Err(GraphJsonError::Ragged);
        }
        let features = Array2::from_shape_vec((self.features.len(), d), self.features.concat())
            .map_err(|_| GraphJsonError::Ragged)?;
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let features = if nodes.is_empty() {
            Array2::zeros((0, super::FeatureLayout::new(self.library.len()).dim()))
        } else {
            features
        };
        let mut g = CircuitGraph::from_parts(self.name, self.library, nodes, &edges, features)?;
        g.meta = self.meta;
        Ok(g)
    }

    pub fn to_string_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph json serializes")
    }
}

impl CircuitGraph {
    pub fn to_json(&self, classes: &ClassMap) -> String {
        GraphJson::from_graph(self, classes).to_string_pretty()
    }

    pub fn from_json(text: &str, classes: &ClassMap) -> Result<Self, GraphJsonError> {
        let parsed: GraphJson = serde_json::from_str(text)?;
        parsed.into_graph(classes)
    }
}
