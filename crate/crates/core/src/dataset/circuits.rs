// SPDX-License-Identifier: Apache-2.0

//! Exact non-adder circuits used as training classes and distractors.

use serde::{Deserialize, Serialize};

use super::builder::{ripple, NetlistBuilder};
use super::fixtures::{gen_fixture, FixtureError, FixtureSpec};
use crate::netlist::{CellLibrary, Netlist};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitKind {
    Adder,
    Multiplier,
    Comparator,
    Multiplexer,
    Subtractor,
}

impl CircuitKind {
    pub const ALL: [CircuitKind; 5] = [
        CircuitKind::Adder,
        CircuitKind::Multiplier,
        CircuitKind::Comparator,
        CircuitKind::Multiplexer,
        CircuitKind::Subtractor,
    ];

    /// Instance-name prefix, matching the default class map.
    pub fn prefix(self) -> &'static str {
        match self {
            CircuitKind::Adder => "add",
            CircuitKind::Multiplier => "mul",
            CircuitKind::Comparator => "comp",
            CircuitKind::Multiplexer => "mux",
            CircuitKind::Subtractor => "sub",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CircuitKind::Adder => "adder",
            CircuitKind::Multiplier => "multiplier",
            CircuitKind::Comparator => "comparator",
            CircuitKind::Multiplexer => "multiplexer",
            CircuitKind::Subtractor => "subtractor",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s || k.prefix() == s)
    }
}

/// Generate an exact `w`-bit circuit of the given kind.
pub fn gen_circuit(kind: CircuitKind, w: usize, lib: &CellLibrary) -> Result<Netlist, FixtureError> {
    if w == 0 {
        return Err(FixtureError::Width);
    }
    match kind {
        CircuitKind::Adder => gen_fixture(&FixtureSpec::exact(w), lib),
        CircuitKind::Multiplier => gen_multiplier(w, lib),
        CircuitKind::Comparator => gen_comparator(w, lib),
        CircuitKind::Multiplexer => gen_mux4(w, lib),
        CircuitKind::Subtractor => gen_subtractor(w, lib),
    }
}

/// Unsigned array multiplier: `AND2` partial products accumulated row by
/// row with `XOR2`/`AND2` half adders and `XOR3`/`MAJ3` full adders.
/// Outputs `p0..p{2w-1}`.
pub fn gen_multiplier(w: usize, lib: &CellLibrary) -> Result<Netlist, FixtureError> {
    let mut b = NetlistBuilder::new(lib, &format!("mul_w{w}"), "mul");
    let a = b.inputs("a", w);
    let x = b.inputs("b", w);
    let mut acc: Vec<Option<String>> = vec![None; 2 * w];
    for j in 0..w {
        let mut carry: Option<String> = None;
        for i in 0..w {
            let pp = b.gate("AND2", &[&a[i], &x[j]]);
            let pos = i + j;
            let (s, c) = match (acc[pos].take(), carry.take()) {
                (None, None) => (pp, None),
                (Some(y), None) | (None, Some(y)) => {
                    (b.gate("XOR2", &[&pp, &y]), Some(b.gate("AND2", &[&pp, &y])))
                }
                (Some(y), Some(c)) => {
                    (b.gate("XOR3", &[&pp, &y, &c]), Some(b.gate("MAJ3", &[&pp, &y, &c])))
                }
            };
            acc[pos] = Some(s);
            carry = c;
        }
        if let Some(c) = carry {
            acc[w + j] = Some(c);
        }
    }
    for (i, net) in acc.iter().enumerate() {
        match net {
            Some(n) => b.output(&format!("p{i}"), n),
            None => b.output(&format!("p{i}"), "1'b0"),
        }
    }
    Ok(b.finish()?)
}

/// Magnitude comparator with outputs `gt` (a > b) and `eq` (a == b).
pub fn gen_comparator(w: usize, lib: &CellLibrary) -> Result<Netlist, FixtureError> {
    let mut b = NetlistBuilder::new(lib, &format!("comp_w{w}"), "comp");
    let a = b.inputs("a", w);
    let x = b.inputs("b", w);
    let mut gt: Option<String> = None;
    let mut eqs = Vec::with_capacity(w);
    for i in 0..w {
        let nb = b.gate("INV", &[&x[i]]);
        let g = b.gate("AND2", &[&a[i], &nb]);
        let e = b.gate("XNOR2", &[&a[i], &x[i]]);
        gt = Some(match gt {
            None => g,
            Some(prev) => {
                let keep = b.gate("AND2", &[&e, &prev]);
                b.gate("OR2", &[&g, &keep])
            }
        });
        eqs.push(e);
    }
    // reduce equalities with AND4/AND3/AND2 trees
    while eqs.len() > 1 {
        let mut next = Vec::new();
        for chunk in eqs.chunks(4) {
            let refs: Vec<&str> = chunk.iter().map(String::as_str).collect();
            next.push(match chunk.len() {
                1 => chunk[0].clone(),
                2 => b.gate("AND2", &refs),
                3 => b.gate("AND3", &refs),
                _ => b.gate("AND4", &refs),
            });
        }
        eqs = next;
    }
    b.output("gt", &gt.expect("w >= 1"));
    b.output("eq", &eqs[0]);
    Ok(b.finish()?)
}

/// `w`-bit 4:1 multiplexer built from `MUX2` cells. Inputs `d0_*..d3_*`,
/// select `s0, s1`; outputs `y0..y{w-1}`.
pub fn gen_mux4(w: usize, lib: &CellLibrary) -> Result<Netlist, FixtureError> {
    let mut b = NetlistBuilder::new(lib, &format!("mux_w{w}"), "mux");
    let d: Vec<Vec<String>> = (0..4).map(|k| b.inputs(&format!("d{k}_"), w)).collect();
    let s0 = b.input("s0");
    let s1 = b.input("s1");
    for i in 0..w {
        let lo = b.gate("MUX2", &[&d[0][i], &d[1][i], &s0]);
        let hi = b.gate("MUX2", &[&d[2][i], &d[3][i], &s0]);
        let y = b.gate("MUX2", &[&lo, &hi, &s1]);
        b.output(&format!("y{i}"), &y);
    }
    Ok(b.finish()?)
}

/// `a - b` as `a + ~b + 1` over a ripple chain. Outputs `d0..d{w-1}` and
/// `nb` (no borrow, i.e. a >= b).
pub fn gen_subtractor(w: usize, lib: &CellLibrary) -> Result<Netlist, FixtureError> {
    let mut b = NetlistBuilder::new(lib, &format!("sub_w{w}"), "sub");
    let a = b.inputs("a", w);
    let x = b.inputs("b", w);
    // bit 0 with carry in 1: d0 = a0 XNOR ~b0 = a0 XOR b0, carry = a0 OR ~b0
    let d0 = b.gate("XOR2", &[&a[0], &x[0]]);
    let nb0 = b.gate("INV", &[&x[0]]);
    let c1 = b.gate("OR2", &[&a[0], &nb0]);
    let inv: Vec<String> = x[1..].iter().map(|n| b.gate("INV", &[n])).collect();
    let (sums, cout) = ripple(&mut b, &a[1..], &inv, Some(c1.clone()), |_| true, true);
    b.output("d0", &d0);
    for (i, s) in sums.into_iter().flatten().enumerate() {
        b.output(&format!("d{}", i + 1), &s);
    }
    b.output("nb", &cout.unwrap_or(c1));
    Ok(b.finish()?)
}
