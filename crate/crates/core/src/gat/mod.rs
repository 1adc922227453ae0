// SPDX-License-Identifier: Apache-2.0

//! Multi-head graph attention network with analytic gradients and Adam.
//!
//! Each layer computes, per head `k`, `z_u = W^k h_u`, scores
//! `e_uv = LeakyReLU(a_src·z_u + a_dst·z_v)` normalized by a softmax over
//! `u ∈ N(v) ∪ {v}` (undirected neighbours plus a self-loop), and
//! `h'_v = ReLU(Σ_u α_uv z_u)`. Heads are concatenated (or averaged on
//! request). A dense classifier with softmax maps final embeddings to
//! class probabilities.

mod adam;
mod layer;
mod model;

use serde::{Deserialize, Serialize};

use crate::graph::CircuitGraph;

pub use adam::{AdamConfig, AdamState};
pub use layer::{attention_coefficients, GatLayerParams, LayerCache, LEAKY_SLOPE};
pub use model::{cross_entropy_loss, Forward, GatModel, GatParams};

/// How the configured hidden width maps onto heads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum HiddenMode {
    /// `hidden` is the concatenated layer width; each head gets `hidden / heads`.
    Total,
    /// Every head is `hidden` wide.
    PerHead,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum HeadCombine {
    Concat,
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatConfig {
    pub in_dim: usize,
    pub hidden: usize,
    pub heads: usize,
    pub hidden_mode: HiddenMode,
    pub layers: usize,
    /// Head combination of the last attention layer; earlier layers concat.
    pub last_combine: HeadCombine,
    pub num_classes: usize,
    pub dropout: f64,
}

impl GatConfig {
    /// 2 layers, 8 heads, 256-wide layers, dropout 0.1.
    pub fn new(in_dim: usize, num_classes: usize) -> Self {
        Self {
            in_dim,
            hidden: 256,
            heads: 8,
            hidden_mode: HiddenMode::Total,
            layers: 2,
            last_combine: HeadCombine::Concat,
            num_classes,
            dropout: 0.1,
        }
    }

    pub fn head_dim(&self) -> usize {
        match self.hidden_mode {
            HiddenMode::Total => self.hidden / self.heads.max(1),
            HiddenMode::PerHead => self.hidden,
        }
    }

    fn combine(&self, layer: usize) -> HeadCombine {
        if layer + 1 == self.layers {
            self.last_combine
        } else {
            HeadCombine::Concat
        }
    }

    fn out_dim(&self, layer: usize) -> usize {
        match self.combine(layer) {
            HeadCombine::Concat => self.heads * self.head_dim(),
            HeadCombine::Mean => self.head_dim(),
        }
    }

    /// Width of the final node embedding fed to the classifier.
    pub fn embedding_dim(&self) -> usize {
        if self.layers == 0 {
            self.in_dim
        } else {
            self.out_dim(self.layers - 1)
        }
    }

    pub fn validate(&self) -> Result<(), GatError> {
        let bad = |msg: &str| Err(GatError::Config(msg.to_string()));
        if self.in_dim == 0 || self.num_classes == 0 || self.heads == 0 || self.layers == 0 {
            return bad("input width, classes, heads and layers must be positive");
        }
        if self.hidden_mode == HiddenMode::Total && (!self.hidden.is_multiple_of(self.heads) || self.hidden == 0) {
            return bad("hidden width must be a positive multiple of the head count");
        }
        if self.hidden == 0 {
            return bad("hidden width must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must lie in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GatError {
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("{what}: expected {expected}, got {got}")]
    Dim { what: &'static str, expected: usize, got: usize },
    #[error("loss mask selects no nodes")]
    EmptyMask,
    #[error("node {node} has label {label} but the model has {classes} classes")]
    Label { node: usize, label: usize, classes: usize },
    #[error("non-finite loss")]
    NonFinite,
}

/// Attention neighbourhoods in compressed row form: the sources attended
/// by node `v` are `v` itself followed by its undirected neighbours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    sources: Vec<usize>,
}

impl Adjacency {
    pub fn from_graph(g: &CircuitGraph) -> Self {
        Self::from_fn(g.len(), |v| g.neighbors(v))
    }

    /// Build from neighbour lists; self-loops are added here and any given
    /// ones are ignored.
    pub fn from_neighbors(lists: &[Vec<usize>]) -> Self {
        Self::from_fn(lists.len(), |v| &lists[v])
    }

    fn from_fn<'a>(n: usize, nbrs: impl Fn(usize) -> &'a [usize]) -> Self {
        let mut offsets = Vec::with_capacity(n + 1);
        let mut sources = Vec::new();
        offsets.push(0);
        for v in 0..n {
            sources.push(v);
            sources.extend(nbrs(v).iter().copied().filter(|&u| u != v));
            offsets.push(sources.len());
        }
        Self { offsets, sources }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_entries(&self) -> usize {
        self.sources.len()
    }

    /// Entry range of node `v` within per-entry arrays such as attention.
    pub fn range(&self, v: usize) -> std::ops::Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    pub fn sources(&self, v: usize) -> &[usize] {
        &self.sources[self.range(v)]
    }

    pub fn source(&self, entry: usize) -> usize {
        self.sources[entry]
    }
}
