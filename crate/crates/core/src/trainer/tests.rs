// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graph::{tests::arb_graph, GraphNode};

fn node(i: usize, cell: usize, label: usize) -> GraphNode {
    GraphNode { name: format!("n{i}"), cell, label: Some(label), pi_inputs: 0, const_inputs: 0, po_outputs: 0 }
}

fn cells() -> Vec<String> {
    ["INV", "BUF", "NAND2"].map(String::from).to_vec()
}

/// Chain of alternating INV (class 0) and NAND2 (class 1) gates.
fn toy_graph(name: &str, n: usize) -> CircuitGraph {
    let nodes = (0..n).map(|i| if i % 2 == 0 { node(i, 0, 0) } else { node(i, 2, 1) }).collect();
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    CircuitGraph::from_structure(name.into(), cells(), nodes, &edges).unwrap()
}

fn toy_classes() -> ClassMap {
    ClassMap::new(&[("inverter", "inv"), ("nand", "nand")]).unwrap()
}

fn small_cfg(epochs: usize, seed: u64) -> TrainConfig {
    TrainConfig { epochs, roots: 20, hidden: 8, heads: 2, seed, single_thread: true, ..TrainConfig::default() }
}

#[test]
fn depth_zero_samples_roots_only() {
    let g = toy_graph("t", 30);
    let mut a = ChaCha8Rng::seed_from_u64(4);
    let mut b = ChaCha8Rng::seed_from_u64(4);
    let nodes = saint_walk_nodes(&g, 10, 0, &mut a);
    let mut roots: Vec<usize> = (0..10).map(|_| rand::Rng::gen_range(&mut b, 0..30)).collect();
    roots.sort_unstable();
    roots.dedup();
    assert_eq!(nodes, roots);
}

#[test]
fn isolated_nodes_sample_without_edges() {
    let nodes = (0..8).map(|i| node(i, 0, 0)).collect();
    let g = CircuitGraph::from_structure("iso".into(), cells(), nodes, &[]).unwrap();
    let (sub, ids) = saint_random_walk_sample(&g, 5, 3, &mut ChaCha8Rng::seed_from_u64(1));
    assert_eq!(sub.num_edges(), 0);
    assert!(!ids.is_empty() && ids.len() <= 5);
}

#[test]
fn complete_graph_golden() {
    let n = 6;
    let nodes = (0..n).map(|i| node(i, 0, 0)).collect();
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    let g = CircuitGraph::from_structure("k6".into(), cells(), nodes, &edges).unwrap();
    let nodes = saint_walk_nodes(&g, n, 2, &mut ChaCha8Rng::seed_from_u64(0));
    assert_eq!(nodes, vec![0, 1, 2, 3, 4, 5]);
}

proptest! {
    #[test]
    fn walk_subgraph_is_induced(g in arb_graph(12), roots in 1usize..10, depth in 0usize..4, seed in any::<u64>()) {
        let (sub, ids) = saint_random_walk_sample(&g, roots, depth, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(ids.iter().all(|&v| v < g.len()));
        let mut expect: Vec<(usize, usize)> = g
            .edges()
            .into_iter()
            .filter_map(|(u, v)| Some((ids.binary_search(&u).ok()?, ids.binary_search(&v).ok()?)))
            .collect();
        expect.sort_unstable();
        prop_assert_eq!(sub.edges(), expect);
    }
}

#[test]
fn zero_epochs_returns_initial_model() {
    let g = toy_graph("a", 10);
    let classes = toy_classes();
    let out = train::<f64>(&[&g], &[], &classes, &small_cfg(0, 3)).unwrap();
    assert!(out.history.is_empty());
    assert_eq!(out.best_epoch, None);
    let init = GatModel::<f64>::new(small_cfg(0, 3).model_config(g.layout().dim(), 2), derive_seed(3, "init")).unwrap();
    assert_eq!(out.model, init);
}

#[test]
fn separable_toy_reaches_full_accuracy() {
    let graphs: Vec<CircuitGraph> = (0..4).map(|i| toy_graph(&format!("g{i}"), 12 + 2 * i)).collect();
    let classes = toy_classes();
    let out = train::<f64>(&[&graphs[0], &graphs[1], &graphs[2]], &[&graphs[3]], &classes, &small_cfg(100, 1)).unwrap();
    let best = out.history.iter().filter_map(|r| r.val_acc).fold(0.0, f64::max);
    assert_eq!(best, 1.0);
    // restored parameters reproduce the best validation accuracy
    let report = evaluate(&out.model, &out.standardizer, &classes, &[&graphs[3]], true).unwrap();
    assert_eq!(report.accuracy, best);
    let first_best = out.history.iter().find(|r| r.val_acc == Some(best)).unwrap().epoch;
    assert_eq!(out.best_epoch, Some(first_best));
}

#[test]
fn training_is_deterministic() {
    let a = toy_graph("a", 14);
    let b = toy_graph("b", 10);
    let classes = toy_classes();
    let run = || train::<f32>(&[&a], &[&b], &classes, &small_cfg(5, 9)).unwrap();
    let (x, y) = (run(), run());
    assert_eq!(x.history, y.history);
    assert_eq!(x.model, y.model);
}

#[test]
fn training_errors() {
    let classes = toy_classes();
    assert!(matches!(train::<f64>(&[], &[], &classes, &small_cfg(1, 0)), Err(TrainError::NoTrainingData)));
    let mut g = toy_graph("u", 4);
    g.set_label(0, None);
    assert!(matches!(train::<f64>(&[&g], &[], &classes, &small_cfg(1, 0)), Err(TrainError::Unlabeled(_))));
    let mut g = toy_graph("l", 4);
    g.set_label(0, Some(7));
    assert!(matches!(train::<f64>(&[&g], &[], &classes, &small_cfg(1, 0)), Err(TrainError::Label { .. })));
    let g = toy_graph("d", 6);
    // the step size overflows f32, so parameters become non-finite after one step
    let cfg = TrainConfig { lr: 1e300, ..small_cfg(5, 0) };
    assert!(matches!(train::<f32>(&[&g], &[], &classes, &cfg), Err(TrainError::Diverged { .. })));
}

#[test]
fn history_csv_format() {
    let h = vec![
        EpochRecord { epoch: 1, loss: 0.5, val_acc: Some(0.25) },
        EpochRecord { epoch: 2, loss: 0.25, val_acc: None },
    ];
    let mut buf = Vec::new();
    write_history_csv(&h, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "epoch,loss,val_acc\n1,0.5,0.25\n2,0.25,\n");
}

#[test]
fn report_from_true_labels_is_perfect() {
    let g = toy_graph("p", 9);
    let classes = toy_classes();
    let truth: Vec<usize> = g.labels().into_iter().map(Option::unwrap).collect();
    let r = report_from_predictions(&[&g], &[truth], &classes).unwrap();
    assert_eq!(r.accuracy, 1.0);
    assert_eq!(r.macro_precision, 1.0);
    assert_eq!(r.macro_recall, 1.0);
}

#[test]
fn constant_predictor_on_balanced_classes() {
    let classes = ClassMap::default();
    let nodes = (0..10).map(|i| node(i, 0, i % 5)).collect();
    let g = CircuitGraph::from_structure("bal".into(), cells(), nodes, &[]).unwrap();
    let r = report_from_predictions(&[&g], &[vec![2; 10]], &classes).unwrap();
    assert!((r.accuracy - 0.2).abs() < 1e-15);
    let trace: u64 = (0..5).map(|i| r.confusion[i][i]).sum();
    let total: u64 = r.confusion.iter().flatten().sum();
    assert_eq!(r.accuracy, trace as f64 / total as f64);
    assert_eq!(r.per_class[2].precision, Some(0.2));
    assert_eq!(r.per_class[0].precision, None);
    assert_eq!(r.per_class[2].recall, Some(1.0));
}

#[test]
fn evaluation_is_order_invariant() {
    let a = toy_graph("a", 8);
    let b = toy_graph("b", 11);
    let classes = toy_classes();
    let out = train::<f64>(&[&a], &[], &classes, &small_cfg(3, 2)).unwrap();
    let r1 = evaluate(&out.model, &out.standardizer, &classes, &[&a, &b], true).unwrap();
    let r2 = evaluate(&out.model, &out.standardizer, &classes, &[&b, &a], false).unwrap();
    assert_eq!(r1.accuracy, r2.accuracy);
    assert_eq!(r1.confusion, r2.confusion);
    assert!((r1.mean_graph_accuracy - r2.mean_graph_accuracy).abs() < 1e-15);
}

#[test]
fn checkpoint_round_trip() {
    let a = toy_graph("a", 8);
    let classes = toy_classes();
    let cfg = small_cfg(2, 2);
    let out = train::<f32>(&[&a], &[], &classes, &cfg).unwrap();
    let ck = Checkpoint::new(&out, a.cells().to_vec(), classes, cfg);
    let text = ck.to_json();
    assert_eq!(checkpoint_scalar(&text).unwrap(), "f32");
    assert_eq!(Checkpoint::<f32>::from_json(&text).unwrap(), ck);
    assert!(matches!(Checkpoint::<f64>::from_json(&text), Err(CheckpointError::Scalar { .. })));
}

#[test]
fn area_csv() {
    let mut g = toy_graph("p", 4);
    g.meta.normalized_area = Some(0.5);
    let truth: Vec<usize> = g.labels().into_iter().map(Option::unwrap).collect();
    let r = report_from_predictions(&[&g], &[truth], &toy_classes()).unwrap();
    let mut buf = Vec::new();
    r.write_area_accuracy_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "circuit,normalized_area,accuracy\np,0.5,1\n");
}
