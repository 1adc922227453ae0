// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::classes::ClassMap;
use crate::gat::{Adjacency, GatModel};
use crate::graph::{CircuitGraph, Standardizer};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEval {
    pub name: String,
    #[serde(default)]
    pub family: Option<String>,
    #[serde(default)]
    pub normalized_area: Option<f64>,
    pub nodes: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub class: String,
    pub support: u64,
    pub predicted: u64,
    /// `None` when the class is never predicted.
    pub precision: Option<f64>,
    /// `None` when the class never occurs.
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub classes: Vec<String>,
    pub graphs: Vec<GraphEval>,
    /// `confusion[true][predicted]`, pooled over all graphs.
    pub confusion: Vec<Vec<u64>>,
    /// Pooled node accuracy, `trace(confusion) / Σ confusion`.
    pub accuracy: f64,
    /// Mean of per-graph accuracies.
    pub mean_graph_accuracy: f64,
    pub per_class: Vec<ClassStats>,
    /// Means over classes with a defined value.
    pub macro_precision: f64,
    pub macro_recall: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Build a report from per-graph predicted classes.
pub fn report_from_predictions(
    graphs: &[&CircuitGraph],
    predictions: &[Vec<usize>],
    classes: &ClassMap,
) -> Result<EvalReport, TrainError> {
    let c = classes.len();
    let mut confusion = vec![vec![0u64; c]; c];
    let mut per_graph = Vec::with_capacity(graphs.len());
    for (g, pred) in graphs.iter().zip(predictions) {
        let mut correct = 0;
        for (v, &p) in pred.iter().enumerate() {
            let y = g.node(v).label.ok_or_else(|| TrainError::Unlabeled(g.name.clone()))?;
            confusion[y][p] += 1;
            correct += (y == p) as usize;
        }
        per_graph.push(GraphEval {
            name: g.name.clone(),
            family: g.meta.family.clone(),
            normalized_area: g.meta.normalized_area,
            nodes: g.len(),
            correct,
            accuracy: if g.is_empty() { 0.0 } else { correct as f64 / g.len() as f64 },
        });
    }
    let total: u64 = confusion.iter().flatten().sum();
    let trace: u64 = (0..c).map(|i| confusion[i][i]).sum();
    let per_class: Vec<ClassStats> = (0..c)
        .map(|i| {
            let support: u64 = confusion[i].iter().sum();
            let predicted: u64 = confusion.iter().map(|r| r[i]).sum();
            ClassStats {
                class: classes.name(i).to_string(),
                support,
                predicted,
                precision: (predicted > 0).then(|| confusion[i][i] as f64 / predicted as f64),
                recall: (support > 0).then(|| confusion[i][i] as f64 / support as f64),
            }
        })
        .collect();
    Ok(EvalReport {
        classes: classes.names().to_vec(),
        accuracy: if total == 0 { 0.0 } else { trace as f64 / total as f64 },
        mean_graph_accuracy: mean(per_graph.iter().map(|g| g.accuracy)),
        macro_precision: mean(per_class.iter().filter_map(|s| s.precision)),
        macro_recall: mean(per_class.iter().filter_map(|s| s.recall)),
        graphs: per_graph,
        confusion,
        per_class,
    })
}

pub(crate) fn predict_graph<T: Scalar>(
    model: &GatModel<T>,
    standardizer: &Standardizer,
    g: &CircuitGraph,
) -> Result<Vec<usize>, TrainError> {
    let x = standardizer.apply::<T>(g.features())?;
    Ok(model.predict(&Adjacency::from_graph(g), &x)?)
}

/// Node-level evaluation of labeled graphs. Graphs are processed in
/// parallel unless `single_thread`; results do not depend on it.
pub fn evaluate<T: Scalar>(
    model: &GatModel<T>,
    standardizer: &Standardizer,
    classes: &ClassMap,
    graphs: &[&CircuitGraph],
    single_thread: bool,
) -> Result<EvalReport, TrainError> {
    for g in graphs {
        if g.labels().iter().any(Option::is_none) {
            return Err(TrainError::Unlabeled(g.name.clone()));
        }
    }
    let preds: Result<Vec<Vec<usize>>, TrainError> = if single_thread {
        graphs.iter().map(|g| predict_graph(model, standardizer, g)).collect()
    } else {
        graphs.par_iter().map(|g| predict_graph(model, standardizer, g)).collect()
    };
    report_from_predictions(graphs, &preds?, classes)
}

impl EvalReport {
    /// `circuit,normalized_area,accuracy` rows, one per graph.
    pub fn write_area_accuracy_csv(&self, out: impl Write) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["circuit", "normalized_area", "accuracy"])?;
        for g in &self.graphs {
            let area = g.normalized_area.map(|a| a.to_string()).unwrap_or_default();
            w.write_record([g.name.clone(), area, g.accuracy.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}
