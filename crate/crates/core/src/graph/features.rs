// SPDX-License-Identifier: Apache-2.0

use std::ops::Range;

use super::CircuitGraph;

/// Column layout of a raw node feature vector:
/// `[is_PI, is_PO] ++ one-hot(cell) ++ two-hop cell counts ++ [in_degree, out_degree]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureLayout {
    pub num_cells: usize,
}

impl FeatureLayout {
    pub const IS_PI: usize = 0;
    pub const IS_PO: usize = 1;

    pub fn new(num_cells: usize) -> Self {
        Self { num_cells }
    }

    pub fn dim(&self) -> usize {
        2 * self.num_cells + 4
    }

    pub fn cell_type(&self) -> Range<usize> {
        2..2 + self.num_cells
    }

    pub fn neighborhood(&self) -> Range<usize> {
        2 + self.num_cells..2 + 2 * self.num_cells
    }

    pub fn in_degree(&self) -> usize {
        2 + 2 * self.num_cells
    }

    pub fn out_degree(&self) -> usize {
        3 + 2 * self.num_cells
    }
}

impl CircuitGraph {
    /// Cell-type census of the nodes at undirected distance 1 or 2 from `v`,
    /// each node counted once and `v` excluded.
    pub fn two_hop_histogram(&self, v: usize) -> Vec<u32> {
        let mut counts = vec![0u32; self.cells.len()];
        let mut seen = vec![v];
        for &u in self.neighbors(v) {
            seen.push(u);
            for &w in self.neighbors(u) {
                seen.push(w);
            }
        }
        seen.sort_unstable();
        seen.dedup();
        for u in seen {
            if u != v {
                counts[self.nodes[u].cell] += 1;
            }
        }
        counts
    }

    /// Structural in-degree: gate drivers plus distinct primary-input and
    /// constant nets.
    pub fn port_in_degree(&self, v: usize) -> usize {
        let n = &self.nodes[v];
        self.in_degree(v) + (n.pi_inputs + n.const_inputs) as usize
    }

    /// Structural out-degree: gate sinks plus the primary output, if any.
    pub fn port_out_degree(&self, v: usize) -> usize {
        self.out_degree(v) + self.nodes[v].po_outputs as usize
    }

    /// Raw feature vector of `v` computed from the current structure.
    pub fn feature_vector(&self, v: usize) -> Vec<f64> {
        let layout = self.layout();
        let mut x = vec![0.0; layout.dim()];
        let node = &self.nodes[v];
        x[FeatureLayout::IS_PI] = node.is_pi() as u8 as f64;
        x[FeatureLayout::IS_PO] = node.is_po() as u8 as f64;
        x[layout.cell_type().start + node.cell] = 1.0;
        let hist = self.two_hop_histogram(v);
        for (slot, c) in x[layout.neighborhood()].iter_mut().zip(hist) {
            *slot = c as f64;
        }
        x[layout.in_degree()] = self.port_in_degree(v) as f64;
        x[layout.out_degree()] = self.port_out_degree(v) as f64;
        x
    }
}
