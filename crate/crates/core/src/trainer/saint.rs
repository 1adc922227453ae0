// SPDX-License-Identifier: Apache-2.0

use rand::Rng;

use crate::graph::CircuitGraph;

/// Nodes visited by `roots` random walks of `depth` undirected steps.
/// Roots are drawn uniformly with replacement; a walk stops early at an
/// isolated node. Returned sorted and deduplicated.
pub fn saint_walk_nodes(g: &CircuitGraph, roots: usize, depth: usize, rng: &mut impl Rng) -> Vec<usize> {
    let n = g.len();
    if n == 0 {
        return Vec::new();
    }
    let mut seen = vec![false; n];
    for _ in 0..roots {
        let mut v = rng.gen_range(0..n);
        seen[v] = true;
        for _ in 0..depth {
            let nb = g.neighbors(v);
            if nb.is_empty() {
                break;
            }
            v = nb[rng.gen_range(0..nb.len())];
            seen[v] = true;
        }
    }
    (0..n).filter(|&v| seen[v]).collect()
}

/// Node-induced subgraph on the nodes of [`saint_walk_nodes`], together
/// with the original ids of its nodes.
pub fn saint_random_walk_sample(
    g: &CircuitGraph,
    roots: usize,
    depth: usize,
    rng: &mut impl Rng,
) -> (CircuitGraph, Vec<usize>) {
    let nodes = saint_walk_nodes(g, roots, depth, rng);
    (g.induced_subgraph(&nodes), nodes)
}
