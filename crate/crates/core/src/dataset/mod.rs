// SPDX-License-Identifier: Apache-2.0

//! Corpus construction: circuit generators, sampled augmentation, splits.

mod builder;
mod circuits;
mod fixtures;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use circuits::{gen_circuit, gen_comparator, gen_multiplier, gen_mux4, gen_subtractor, CircuitKind};
pub use fixtures::{exact_gate_count, gen_fixture, Family, FixtureError, FixtureSpec, ADDER_PREFIX};

use crate::classes::ClassMap;
use crate::graph::{build_graph, CircuitGraph, GraphMeta, StandardizeError, Standardizer};
use crate::netlist::{CellLibrary, Netlist, NetlistError};
use crate::sampler::{sample, SampleError, SamplingConfig, SamplingMode};
use crate::seed::derive_seed;

/// Largest number of initially selected nodes used by default augmentation.
pub const MAX_LEVEL: usize = 9;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{graph}: level {level} exceeds the {available} candidate nodes")]
    Level { graph: String, level: usize, available: usize },
    #[error("split fractions must be finite, non-negative and not all zero")]
    Fractions,
    #[error("the {0} split would be empty")]
    EmptySplit(Split),
    #[error("graph `{0}` has unlabeled nodes")]
    Unlabeled(String),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    Standardize(#[from] StandardizeError),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Val => "validation",
            Split::Test => "test",
        })
    }
}

/// Labeled graph of a netlist whose instance prefixes name the classes.
pub fn labeled_graph(
    mut netlist: Netlist,
    lib: &CellLibrary,
    classes: &ClassMap,
    family: Option<&str>,
) -> Result<CircuitGraph, DatasetError> {
    netlist.assign_labels(classes, None)?;
    let mut g = build_graph(&netlist, lib);
    if g.labels().iter().any(Option::is_none) {
        return Err(DatasetError::Unlabeled(g.name));
    }
    g.meta = GraphMeta { family: family.map(str::to_string), source: None, normalized_area: Some(1.0) };
    Ok(g)
}

/// Candidates that a sampling mode selects from.
fn candidates(g: &CircuitGraph, mode: SamplingMode) -> usize {
    match mode {
        SamplingMode::Random => g.len(),
        SamplingMode::Leaf => crate::sampler::identify_leaf_nodes(g).len(),
    }
}

/// Levels `1..=9`, capped one below the candidate count so at least one
/// candidate always survives (1..=8 for an 8-bit adder's 9 outputs).
pub fn default_levels(g: &CircuitGraph, mode: SamplingMode) -> Vec<usize> {
    (1..=MAX_LEVEL.min(candidates(g, mode).saturating_sub(1))).collect()
}

/// One sampled graph per source graph and level. `levels = None` uses
/// [`default_levels`] per graph. Sampled graphs are named
/// `{source}_{mode}{level}` and record their source and normalized area.
pub fn augment(
    graphs: &[CircuitGraph],
    mode: SamplingMode,
    levels: Option<&[usize]>,
    seed: u64,
) -> Result<Vec<CircuitGraph>, DatasetError> {
    let mut out = Vec::new();
    for g in graphs {
        let lv = match levels {
            Some(l) => l.to_vec(),
            None => default_levels(g, mode),
        };
        let mode_name = match mode {
            SamplingMode::Random => "random",
            SamplingMode::Leaf => "leaf",
        };
        for n in lv {
            let available = candidates(g, mode);
            if n > available {
                return Err(DatasetError::Level { graph: g.name.clone(), level: n, available });
            }
            let cfg = SamplingConfig {
                mode,
                num_selected: n,
                seed: derive_seed(seed, &format!("augment/{}/{mode_name}/{n}", g.name)),
                recompute_features: false,
            };
            let mut s = sample(g, &cfg)?.graph;
            s.name = format!("{}_{mode_name}{n}", g.name);
            let base_area = g.meta.normalized_area.unwrap_or(1.0);
            s.meta = GraphMeta {
                family: g.meta.family.clone(),
                source: Some(g.meta.source.clone().unwrap_or_else(|| g.name.clone())),
                normalized_area: Some(base_area * s.len() as f64 / g.len().max(1) as f64),
            };
            out.push(s);
        }
    }
    Ok(out)
}

/// Graph-level split: counts are rounded fractions of `n` for validation
/// and test, the remainder goes to train; membership by seeded shuffle.
pub fn make_splits(n: usize, fractions: [f64; 3], seed: u64) -> Result<Vec<Split>, DatasetError> {
    let total: f64 = fractions.iter().sum();
    if fractions.iter().any(|f| !f.is_finite() || *f < 0.0) || total <= 0.0 {
        return Err(DatasetError::Fractions);
    }
    let frac = fractions.map(|f| f / total);
    let val = (n as f64 * frac[1]).round() as usize;
    let test = (n as f64 * frac[2]).round() as usize;
    if val + test > n {
        return Err(DatasetError::EmptySplit(Split::Train));
    }
    let train = n - val - test;
    for (count, f, split) in [(train, frac[0], Split::Train), (val, frac[1], Split::Val), (test, frac[2], Split::Test)] {
        if f > 0.0 && count == 0 {
            return Err(DatasetError::EmptySplit(split));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = vec![Split::Train; n];
    for (rank, &i) in order.iter().enumerate() {
        out[i] = if rank < train {
            Split::Train
        } else if rank < train + val {
            Split::Val
        } else {
            Split::Test
        };
    }
    Ok(out)
}

/// Split whole groups (e.g. all variants of one source circuit) together.
pub fn make_group_splits(groups: &[String], fractions: [f64; 3], seed: u64) -> Result<Vec<Split>, DatasetError> {
    let mut keys: Vec<&String> = groups.iter().collect();
    keys.sort();
    keys.dedup();
    let per_key = make_splits(keys.len(), fractions, seed)?;
    Ok(groups
        .iter()
        .map(|g| per_key[keys.binary_search(&g).expect("key present")])
        .collect())
}

/// Labeled graphs with a split assignment and train-fitted statistics.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graphs: Vec<CircuitGraph>,
    pub splits: Vec<Split>,
    pub classes: ClassMap,
}

impl Dataset {
    pub fn new(graphs: Vec<CircuitGraph>, splits: Vec<Split>, classes: ClassMap) -> Result<Self, DatasetError> {
        assert_eq!(graphs.len(), splits.len(), "one split per graph");
        for g in &graphs {
            if g.labels().iter().any(Option::is_none) {
                return Err(DatasetError::Unlabeled(g.name.clone()));
            }
        }
        Ok(Self { graphs, splits, classes })
    }

    pub fn split(&self, which: Split) -> Vec<&CircuitGraph> {
        self.graphs.iter().zip(&self.splits).filter(|(_, s)| **s == which).map(|(g, _)| g).collect()
    }

    /// Standardization statistics over the training graphs only.
    pub fn fit_standardizer(&self) -> Result<Standardizer, DatasetError> {
        Ok(Standardizer::fit(self.split(Split::Train).into_iter().map(|g| g.features()))?)
    }
}

/// One generated file, as listed in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub name: String,
    pub family: String,
    pub width: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    pub node_count: usize,
    /// `node_count / exact_node_count` of the same width.
    pub normalized_area: f64,
}

impl ManifestEntry {
    pub fn for_fixture(file: String, spec: &FixtureSpec, node_count: usize) -> Self {
        let (k, m) = match spec.family {
            Family::Exact => (None, None),
            Family::Aca => (None, Some(spec.param)),
            _ => (Some(spec.param), None),
        };
        Self {
            file,
            name: spec.module_name(),
            family: spec.family.name().to_string(),
            width: spec.width,
            k,
            m,
            node_count,
            normalized_area: node_count as f64 / exact_gate_count(spec.width) as f64,
        }
    }
}

#[cfg(test)]
mod tests;
