// SPDX-License-Identifier: Apache-2.0

//! GraphSAINT-style training loop, model selection and evaluation.

mod checkpoint;
mod eval;
mod saint;

use std::io::Write;

use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use checkpoint::{checkpoint_scalar, Checkpoint, CheckpointError, CHECKPOINT_VERSION};
pub use eval::{evaluate, report_from_predictions, ClassStats, EvalReport, GraphEval};
pub use saint::{saint_random_walk_sample, saint_walk_nodes};

use crate::classes::ClassMap;
use crate::gat::{AdamConfig, AdamState, Adjacency, GatConfig, GatError, GatModel, HeadCombine, HiddenMode};
use crate::graph::{CircuitGraph, StandardizeError, Standardizer};
use crate::scalar::Scalar;
use crate::seed::derive_seed;

#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("no training graphs")]
    NoTrainingData,
    #[error("graph `{0}` has unlabeled nodes")]
    Unlabeled(String),
    #[error("graph `{graph}` has label {label} outside the {classes} classes")]
    Label { graph: String, label: usize, classes: usize },
    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("graphs disagree on the cell library")]
    Library,
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] GatError),
    #[error(transparent)]
    Standardize(#[from] StandardizeError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Walk roots per sampled subgraph, capped at the training node count.
    pub roots: usize,
    pub depth: usize,
    /// Sampled subgraphs (optimizer steps) per epoch.
    pub batches: usize,
    pub lr: f64,
    pub dropout: f64,
    pub seed: u64,
    pub single_thread: bool,
    pub hidden: usize,
    pub heads: usize,
    pub hidden_mode: HiddenMode,
    pub last_combine: HeadCombine,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            roots: 3000,
            depth: 2,
            batches: 1,
            lr: 0.01,
            dropout: 0.1,
            seed: 0,
            single_thread: false,
            hidden: 256,
            heads: 8,
            hidden_mode: HiddenMode::Total,
            last_combine: HeadCombine::Concat,
        }
    }
}

impl TrainConfig {
    pub fn model_config(&self, in_dim: usize, num_classes: usize) -> GatConfig {
        GatConfig {
            hidden: self.hidden,
            heads: self.heads,
            hidden_mode: self.hidden_mode,
            last_combine: self.last_combine,
            dropout: self.dropout,
            ..GatConfig::new(in_dim, num_classes)
        }
    }

    fn validate(&self) -> Result<(), TrainError> {
        if self.roots == 0 || self.batches == 0 {
            return Err(TrainError::Config("roots and batches must be positive".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(TrainError::Config("learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean training loss over the epoch's batches.
    pub loss: f64,
    pub val_acc: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub model: GatModel<T>,
    pub standardizer: Standardizer,
    pub history: Vec<EpochRecord>,
    /// Epoch whose parameters were restored (1-based); `None` without a
    /// validation set or when no epoch ran.
    pub best_epoch: Option<usize>,
}

/// Write `epoch,loss,val_acc` rows; `val_acc` is empty without validation.
pub fn write_history_csv(history: &[EpochRecord], out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "loss", "val_acc"])?;
    for r in history {
        let val = r.val_acc.map(|v| v.to_string()).unwrap_or_default();
        w.write_record([r.epoch.to_string(), r.loss.to_string(), val])?;
    }
    w.flush()?;
    Ok(())
}

fn labels_of(g: &CircuitGraph, classes: usize) -> Result<Vec<usize>, TrainError> {
    g.nodes()
        .iter()
        .map(|n| match n.label {
            None => Err(TrainError::Unlabeled(g.name.clone())),
            Some(l) if l >= classes => Err(TrainError::Label { graph: g.name.clone(), label: l, classes }),
            Some(l) => Ok(l),
        })
        .collect()
}

struct Prepared<T> {
    adj: Adjacency,
    x: Array2<T>,
    labels: Vec<usize>,
}

fn prepare<T: Scalar>(g: &CircuitGraph, st: &Standardizer, classes: usize) -> Result<Prepared<T>, TrainError> {
    Ok(Prepared { adj: Adjacency::from_graph(g), x: st.apply(g.features())?, labels: labels_of(g, classes)? })
}

fn accuracy<T: Scalar>(model: &GatModel<T>, val: &[Prepared<T>]) -> Result<f64, TrainError> {
    let (mut correct, mut total) = (0usize, 0usize);
    for p in val {
        let pred = model.predict(&p.adj, &p.x)?;
        correct += pred.iter().zip(&p.labels).filter(|(a, b)| a == b).count();
        total += pred.len();
    }
    Ok(if total == 0 { 0.0 } else { correct as f64 / total as f64 })
}

/// Train a fresh model. Training graphs are merged into one disjoint union;
/// each batch is a random-walk subgraph of it with loss on all its nodes.
/// With validation graphs, the parameters of the epoch with the highest
/// validation accuracy (earliest on ties) are restored at the end.
pub fn train<T: Scalar>(
    train_graphs: &[&CircuitGraph],
    val_graphs: &[&CircuitGraph],
    classes: &ClassMap,
    cfg: &TrainConfig,
) -> Result<TrainOutcome<T>, TrainError> {
    cfg.validate()?;
    let first = train_graphs.first().ok_or(TrainError::NoTrainingData)?;
    if train_graphs.iter().chain(val_graphs).any(|g| g.cells() != first.cells()) {
        return Err(TrainError::Library);
    }
    let c = classes.len();
    let standardizer = Standardizer::fit(train_graphs.iter().map(|g| g.features()))?;
    let (merged, _) = CircuitGraph::disjoint_union("train", train_graphs);
    let full: Prepared<T> = prepare(&merged, &standardizer, c)?;
    let val: Vec<Prepared<T>> =
        val_graphs.iter().map(|g| prepare(g, &standardizer, c)).collect::<Result<_, _>>()?;

    let mut model = GatModel::<T>::new(cfg.model_config(standardizer.dim(), c), derive_seed(cfg.seed, "init"))?;
    let mut adam = AdamState::for_params(AdamConfig { lr: cfg.lr, ..AdamConfig::default() }, &model.params);
    let mut walk_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "saint"));
    let mut drop_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, "dropout"));
    let roots = cfg.roots.min(merged.len());

    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, crate::gat::GatParams<T>)> = None;
    for epoch in 1..=cfg.epochs {
        let mut loss_sum = 0.0;
        for _ in 0..cfg.batches {
            let nodes = saint_walk_nodes(&merged, roots, cfg.depth, &mut walk_rng);
            let sub = merged.induced_subgraph(&nodes);
            let adj = Adjacency::from_graph(&sub);
            let x = full.x.select(Axis(0), &nodes);
            let labels: Vec<usize> = nodes.iter().map(|&v| full.labels[v]).collect();
            let mask = vec![true; nodes.len()];
            let (loss, grads) = model.loss_and_grad(&adj, &x, &labels, &mask, Some(&mut drop_rng))?;
            let loss = loss.to_f64_lossy();
            if !loss.is_finite() {
                return Err(TrainError::Diverged { epoch, loss });
            }
            adam.step(&mut model.params, &grads);
            loss_sum += loss;
        }
        let val_acc = if val.is_empty() { None } else { Some(accuracy(&model, &val)?) };
        if let Some(acc) = val_acc {
            if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
                best = Some((acc, epoch, model.params.clone()));
            }
        }
        history.push(EpochRecord { epoch, loss: loss_sum / cfg.batches as f64, val_acc });
    }
    let best_epoch = best.map(|(_, epoch, params)| {
        model.params = params;
        epoch
    });
    Ok(TrainOutcome { model, standardizer, history, best_epoch })
}

#[cfg(test)]
mod tests;
