// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use super::*;
use crate::classes::ClassMap;
use crate::graph::{build_graph, tests::arb_graph};
use crate::netlist::{parse_netlist, CellLibrary};

/// Gate-level 3-bit adder used for the sampling walk-throughs. `U17`
/// drives the carry-out through four single-fanout gates; `U20` reads only
/// primary inputs.
pub(crate) const WALKTHROUGH: &str = "\
module walk3;
input a0, a1, a2, b0, b1, b2;
output s0, s1, s2, cout;
wire c0, p1, c1, p2, n13, n14, n15, n16;
XOR2 add_U10 (.A(a0), .B(b0), .Y(s0));
AND2 add_U11 (.A(a0), .B(b0), .Y(c0));
XOR2 add_U18 (.A(a1), .B(b1), .Y(p1));
XOR2 add_U19 (.A(p1), .B(c0), .Y(s1));
MAJ3 add_U21 (.A(a1), .B(b1), .C(c0), .Y(c1));
XOR2 add_U20 (.A(a2), .B(b2), .Y(p2));
XOR2 add_U22 (.A(p2), .B(c1), .Y(s2));
INV add_U13 (.A(c1), .Y(n13));
NOR2 add_U14 (.A(a2), .B(b2), .Y(n14));
NAND2 add_U15 (.A(a2), .B(b2), .Y(n15));
OR2 add_U16 (.A(n14), .B(n13), .Y(n16));
NAND2 add_U17 (.A(n15), .B(n16), .Y(cout));
endmodule
";

pub(crate) fn walkthrough() -> CircuitGraph {
    let lib = CellLibrary::default_library();
    let mut n = parse_netlist(WALKTHROUGH, &lib).unwrap();
    n.assign_labels(&ClassMap::default(), None).unwrap();
    build_graph(&n, &lib)
}

fn id(g: &CircuitGraph, name: &str) -> usize {
    g.nodes().iter().position(|n| n.name == name).unwrap()
}

fn names(g: &CircuitGraph, ids: &[usize]) -> Vec<String> {
    let mut v: Vec<String> = ids.iter().map(|&i| g.node(i).name.clone()).collect();
    v.sort();
    v
}

#[test]
fn walkthrough_is_an_adder() {
    let lib = CellLibrary::default_library();
    let n = parse_netlist(WALKTHROUGH, &lib).unwrap();
    for a in 0..8u32 {
        for b in 0..8u32 {
            let input: Vec<bool> = (0..3).map(|i| a >> i & 1 == 1).chain((0..3).map(|i| b >> i & 1 == 1)).collect();
            let out = n.simulate(&lib, &input).unwrap();
            let v: u32 = out.iter().enumerate().map(|(i, &x)| (x as u32) << i).sum();
            assert_eq!(v, a + b);
        }
    }
}

#[test]
fn datapath_of_u17_has_four_nodes() {
    let g = walkthrough();
    let dp = find_datapath(&g, id(&g, "add_U17"));
    assert_eq!(names(&g, &dp), ["add_U13", "add_U14", "add_U15", "add_U16"]);
}

#[test]
fn root_node_has_empty_datapath() {
    let g = walkthrough();
    assert!(find_datapath(&g, id(&g, "add_U20")).is_empty());
}

#[test]
fn sampling_u17_removes_five() {
    let g = walkthrough();
    let s = sample_graph(&g, &[id(&g, "add_U17")]).unwrap();
    assert_eq!(s.graph.len(), g.len() - 5);
    assert_eq!(s.report.removed.len(), 5);
    assert_eq!(s.report.selected, ["add_U17"]);
}

#[test]
fn sampling_root_removes_one() {
    let g = walkthrough();
    let s = sample_graph(&g, &[id(&g, "add_U20")]).unwrap();
    assert_eq!(s.graph.len(), g.len() - 1);
}

#[test]
fn empty_selection_rejected() {
    let g = walkthrough();
    assert!(matches!(sample_graph(&g, &[]), Err(SampleError::EmptySelection)));
    assert!(matches!(sample_graph(&g, &[99]), Err(SampleError::NodeOutOfRange(99))));
    assert!(matches!(sample_graph(&g, &[1, 1]), Err(SampleError::DuplicateSelection(1))));
}

#[test]
fn survivors_keep_source_features() {
    let g = walkthrough();
    let s = sample_graph(&g, &[id(&g, "add_U17")]).unwrap();
    for (i, node) in s.graph.nodes().iter().enumerate() {
        assert_eq!(s.graph.features().row(i), g.features().row(id(&g, &node.name)));
    }
}

#[test]
fn random_sampling_with_seed_forcing_u17() {
    let g = walkthrough();
    let target = id(&g, "add_U17");
    let seed = (0..1000u64)
        .find(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            choose(&mut rng, &(0..g.len()).collect::<Vec<_>>(), 1).unwrap() == [target]
        })
        .unwrap();
    let cfg = SamplingConfig { mode: SamplingMode::Random, num_selected: 1, seed, recompute_features: false };
    let s = random_node_sampling(&g, &cfg).unwrap();
    assert_eq!(s.graph.len(), g.len() - 5);
}

#[test]
fn random_sampling_all_nodes_empties_graph() {
    let g = walkthrough();
    let cfg = SamplingConfig { mode: SamplingMode::Random, num_selected: g.len(), seed: 3, recompute_features: false };
    assert!(random_node_sampling(&g, &cfg).unwrap().graph.is_empty());
    let cfg = SamplingConfig { num_selected: g.len() + 1, ..cfg };
    assert!(matches!(random_node_sampling(&g, &cfg), Err(SampleError::TooMany { .. })));
    let cfg = SamplingConfig { num_selected: 0, ..cfg };
    assert!(matches!(random_node_sampling(&g, &cfg), Err(SampleError::EmptySelection)));
}

#[test]
fn random_sampling_is_deterministic() {
    let g = walkthrough();
    let cfg = SamplingConfig { mode: SamplingMode::Random, num_selected: 3, seed: 42, recompute_features: false };
    let a = random_node_sampling(&g, &cfg).unwrap();
    let b = random_node_sampling(&g, &cfg).unwrap();
    assert_eq!(a.graph, b.graph);
    assert_eq!(a.report, b.report);
}

fn leaf_seed_for(g: &CircuitGraph, leaf: usize) -> u64 {
    let leaves = identify_leaf_nodes(g);
    (0..1000u64)
        .find(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            choose(&mut rng, &leaves, 1).unwrap() == [leaf]
        })
        .unwrap()
}

#[test]
fn leaf_sampling_u19_inserts_buf() {
    let g = walkthrough();
    let u19 = id(&g, "add_U19");
    let seed = leaf_seed_for(&g, u19);
    let cfg = SamplingConfig { mode: SamplingMode::Leaf, num_selected: 1, seed, recompute_features: false };
    let s = leaf_node_sampling(&g, &cfg).unwrap();
    assert_eq!(s.report.selected, ["add_U19"]);
    assert_eq!(s.report.removed, ["add_U18", "add_U19"]);
    assert_eq!(s.report.added.len(), 1);
    assert_eq!(identify_leaf_nodes(&s.graph).len(), identify_leaf_nodes(&g).len());

    let rep = s.graph.len() - 1;
    let node = s.graph.node(rep);
    assert_eq!(s.graph.cells()[node.cell], "BUF");
    assert_eq!(node.label, g.node(u19).label);
    let x = s.graph.features().row(rep);
    let layout = s.graph.layout();
    assert_eq!(x[FeatureLayout::IS_PI], 1.0);
    assert_eq!(x[FeatureLayout::IS_PO], 1.0);
    assert_eq!(x[layout.in_degree()], 1.0);
    assert_eq!(x[layout.out_degree()], 1.0);
    assert!(s.graph.neighbors(rep).is_empty());
    // the stored row is what recomputation would produce
    assert_eq!(x.to_vec(), s.graph.feature_vector(rep));
}

#[test]
fn leaf_sampling_all_leaves_of_tree_leaves_only_bufs() {
    let lib = CellLibrary::default_library();
    // every gate feeds exactly one sink: a fan-in tree per output
    let text = "module t; input a, b, c, d; output y, z; wire w1, w2, w3;
        NAND2 U1 (.A(a), .B(b), .Y(w1));
        INV U2 (.A(w1), .Y(w2));
        NOR2 U3 (.A(w2), .B(c), .Y(y));
        XOR2 U4 (.A(c), .B(d), .Y(w3));
        INV U5 (.A(w3), .Y(z));
        endmodule";
    let n = parse_netlist(text, &lib).unwrap();
    let g = build_graph(&n, &lib);
    let cfg = SamplingConfig { mode: SamplingMode::Leaf, num_selected: 2, seed: 0, recompute_features: false };
    let s = leaf_node_sampling(&g, &cfg).unwrap();
    assert_eq!(s.graph.len(), 2);
    assert!(s.graph.nodes().iter().all(|n| n.cell == lib.lookup("BUF").unwrap()));
}

#[test]
fn leaf_sampling_errors() {
    let g = walkthrough();
    let cfg = SamplingConfig { mode: SamplingMode::Leaf, num_selected: 5, seed: 0, recompute_features: false };
    assert!(matches!(leaf_node_sampling(&g, &cfg), Err(SampleError::TooMany { .. })));
    let lib = CellLibrary::parse("INV 1\n").unwrap();
    let n = parse_netlist("module t; input a; output y; INV U1 (.A(a), .Y(y)); endmodule", &lib).unwrap();
    let g = build_graph(&n, &lib);
    let cfg = SamplingConfig { num_selected: 1, ..cfg };
    assert!(matches!(leaf_node_sampling(&g, &cfg), Err(SampleError::Graph(GraphError::MissingBuf))));
}

#[test]
fn leaf_sampling_sweeps_orphaned_logic() {
    let g = walkthrough();
    // Selecting both s2 and cout leaves U20 (p2) and U21 (c1) partly
    // orphaned; U20 loses its only sink and must go.
    let sel = [id(&g, "add_U22"), id(&g, "add_U17")];
    let mut drop = removal_mask(&g, &sel);
    let before: usize = drop.iter().filter(|&&d| d).count();
    sweep_dead_logic(&g, &mut drop);
    assert!(drop[id(&g, "add_U20")]);
    assert!(drop.iter().filter(|&&d| d).count() > before);
}

#[test]
fn recompute_flag_changes_survivor_rows() {
    let g = walkthrough();
    let cfg = SamplingConfig { mode: SamplingMode::Random, num_selected: 3, seed: 1, recompute_features: true };
    let s = random_node_sampling(&g, &cfg).unwrap();
    for v in 0..s.graph.len() {
        assert_eq!(s.graph.features().row(v).to_vec(), s.graph.feature_vector(v));
    }
}

/// Random DAG on up to `max` nodes with edges from lower to higher index.
pub(crate) fn arb_dag(max: usize) -> impl Strategy<Value = CircuitGraph> {
    (1..=max)
        .prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..2 * n + 1)))
        .prop_map(|(n, pairs)| {
            let edges: Vec<(usize, usize)> = pairs
                .into_iter()
                .filter(|(u, v)| u != v)
                .map(|(u, v)| (u.min(v), u.max(v)))
                .collect();
            let nodes = (0..n)
                .map(|i| GraphNode {
                    name: format!("n{i}"),
                    cell: i % 2,
                    label: Some(0),
                    pi_inputs: 0,
                    const_inputs: 0,
                    po_outputs: 0,
                })
                .collect();
            CircuitGraph::from_structure("dag".into(), vec!["INV".into(), "BUF".into()], nodes, &edges).unwrap()
        })
}

/// Follow single out-edges from `p`; true iff the chain reaches `c`.
fn exclusive_to(g: &CircuitGraph, p: usize, c: usize) -> bool {
    let mut x = p;
    for _ in 0..=g.len() {
        if g.out_degree(x) != 1 {
            return false;
        }
        x = g.successors(x)[0];
        if x == c {
            return true;
        }
    }
    false
}

fn datapath_oracle(g: &CircuitGraph, c: usize) -> Vec<usize> {
    (0..g.len()).filter(|&p| p != c && exclusive_to(g, p, c)).collect()
}

proptest! {
    #[test]
    fn datapath_matches_oracle(g in arb_dag(12)) {
        for c in 0..g.len() {
            prop_assert_eq!(find_datapath(&g, c), datapath_oracle(&g, c));
        }
    }

    #[test]
    fn datapath_terminates_on_cyclic_graphs(g in arb_graph(10)) {
        for c in 0..g.len() {
            let dp = find_datapath(&g, c);
            prop_assert!(dp.iter().all(|&p| g.out_degree(p) == 1 && p != c));
        }
    }

    #[test]
    fn sample_graph_matches_set_subtraction(g in arb_dag(12), picks in prop::collection::vec(any::<prop::sample::Index>(), 1..4)) {
        let mut sel: Vec<usize> = picks.iter().map(|i| i.index(g.len())).collect();
        sel.sort_unstable();
        sel.dedup();
        let mut gone = std::collections::BTreeSet::new();
        for &s in &sel {
            gone.insert(s);
            gone.extend(datapath_oracle(&g, s));
        }
        let expect: Vec<String> = (0..g.len()).filter(|v| !gone.contains(v)).map(|v| g.node(v).name.clone()).collect();
        let got = sample_graph(&g, &sel).unwrap();
        let got: Vec<String> = got.graph.nodes().iter().map(|n| n.name.clone()).collect();
        prop_assert_eq!(got, expect);
    }

    #[test]
    fn removal_is_monotone(g in arb_dag(12), picks in prop::collection::vec(any::<prop::sample::Index>(), 2..5)) {
        let mut sel: Vec<usize> = picks.iter().map(|i| i.index(g.len())).collect();
        sel.dedup();
        let small = removal_mask(&g, &sel[..1]);
        let big = removal_mask(&g, &sel);
        prop_assert!(small.iter().zip(&big).all(|(&s, &b)| !s || b));
    }

    #[test]
    fn leaf_sampling_preserves_leaf_count(g in arb_dag(12), n in 1usize..6, seed in any::<u64>()) {
        let leaves = identify_leaf_nodes(&g).len();
        let cfg = SamplingConfig { mode: SamplingMode::Leaf, num_selected: n.min(leaves), seed, recompute_features: false };
        let s = leaf_node_sampling(&g, &cfg).unwrap();
        prop_assert_eq!(identify_leaf_nodes(&s.graph).len(), leaves);
        for name in &s.report.added {
            let v = s.graph.nodes().iter().position(|x| &x.name == name).unwrap();
            prop_assert!(s.graph.two_hop_histogram(v).iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn leaves_are_exactly_zero_out_degree(g in arb_graph(10)) {
        let leaves = identify_leaf_nodes(&g);
        for v in 0..g.len() {
            prop_assert_eq!(leaves.contains(&v), g.successors(v).is_empty());
        }
    }
}

#[test]
fn leaves_of_simple_shapes() {
    let cells = vec!["INV".to_string(), "BUF".to_string()];
    let mk = |n: usize| {
        (0..n)
            .map(|i| GraphNode {
                name: format!("n{i}"),
                cell: 0,
                label: None,
                pi_inputs: 0,
                const_inputs: 0,
                po_outputs: 0,
            })
            .collect::<Vec<_>>()
    };
    let g = CircuitGraph::from_structure("e".into(), cells.clone(), mk(3), &[]).unwrap();
    assert_eq!(identify_leaf_nodes(&g), vec![0, 1, 2]);
    let g = CircuitGraph::from_structure("c".into(), cells, mk(3), &[(0, 1), (1, 2)]).unwrap();
    assert_eq!(identify_leaf_nodes(&g), vec![2]);
    let rca = walkthrough();
    assert_eq!(identify_leaf_nodes(&rca).len(), 4);
}
