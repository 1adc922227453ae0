// SPDX-License-Identifier: Apache-2.0

//! Exact and approximate adder generators.
//!
//! Every adder has inputs `a0..a{w-1}, b0..b{w-1}` and outputs
//! `s0..s{w-1}, cout`. Lower-part adders keep a ripple-carry adder on the
//! top `w - k` bits:
//!
//! | family | low `k` sum bits | carry into the exact part |
//! |--------|------------------|---------------------------|
//! | LTA    | constant 0       | 0                         |
//! | LCA    | copy of `a`      | 0                         |
//! | LOA    | `a_i OR b_i`     | `a_{k-1} AND b_{k-1}`     |
//! | ETA-I  | `a_i XOR b_i`, forced to 1 below any generate `a_j b_j` | 0 |
//!
//! ACA(m) computes each sum bit `i >= m` as the top bit of an independent
//! `m`-bit ripple adder over operand bits `i-m+1..=i`; the low `m` bits are
//! exact and the carry out comes from the last window.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::builder::{ripple, NetlistBuilder};
use crate::netlist::{CellLibrary, Netlist, NetlistError};

pub const ADDER_PREFIX: &str = "add";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "exact")]
    Exact,
    #[serde(rename = "LTA")]
    Lta,
    #[serde(rename = "LCA")]
    Lca,
    #[serde(rename = "LOA")]
    Loa,
    #[serde(rename = "ETA-I")]
    EtaI,
    #[serde(rename = "ACA")]
    Aca,
}

impl Family {
    pub const ALL: [Family; 6] = [Family::Exact, Family::Lta, Family::Lca, Family::Loa, Family::EtaI, Family::Aca];

    pub fn name(self) -> &'static str {
        match self {
            Family::Exact => "exact",
            Family::Lta => "LTA",
            Family::Lca => "LCA",
            Family::Loa => "LOA",
            Family::EtaI => "ETA-I",
            Family::Aca => "ACA",
        }
    }

    pub fn is_lower_part(self) -> bool {
        matches!(self, Family::Lta | Family::Lca | Family::Loa | Family::EtaI)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = FixtureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        Ok(match key.as_str() {
            "exact" | "rca" => Family::Exact,
            "lta" => Family::Lta,
            "lca" => Family::Lca,
            "loa" => Family::Loa,
            "etai" | "eta" => Family::EtaI,
            "aca" => Family::Aca,
            _ => return Err(FixtureError::UnknownFamily(s.to_string())),
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("unknown adder family `{0}`")]
    UnknownFamily(String),
    #[error("{family}: parameter {param} out of range for width {width} ({rule})")]
    Param { family: Family, width: usize, param: usize, rule: &'static str },
    #[error("width must be at least 1")]
    Width,
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// `param` is `k` for lower-part adders, `m` for ACA and ignored for exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FixtureSpec {
    pub family: Family,
    pub width: usize,
    pub param: usize,
}

impl FixtureSpec {
    pub fn exact(width: usize) -> Self {
        Self { family: Family::Exact, width, param: 0 }
    }

    pub fn new(family: Family, width: usize, param: usize) -> Self {
        Self { family, width, param }
    }

    pub fn validate(&self) -> Result<(), FixtureError> {
        if self.width == 0 {
            return Err(FixtureError::Width);
        }
        let err = |rule| Err(FixtureError::Param { family: self.family, width: self.width, param: self.param, rule });
        match self.family {
            Family::Exact => Ok(()),
            Family::Aca if self.param == 0 || self.param > self.width => err("1 <= m <= w"),
            Family::Aca => Ok(()),
            _ if self.param >= self.width => err("0 <= k < w"),
            _ => Ok(()),
        }
    }

    /// Module name, e.g. `lta_w16_k4`, `aca_w8_m3`, `exact_w12`.
    pub fn module_name(&self) -> String {
        let fam = self.family.name().to_ascii_lowercase().replace('-', "");
        match self.family {
            Family::Exact => format!("{fam}_w{}", self.width),
            Family::Aca => format!("{fam}_w{}_m{}", self.width, self.param),
            _ => format!("{fam}_w{}_k{}", self.width, self.param),
        }
    }
}

pub fn gen_fixture(spec: &FixtureSpec, lib: &CellLibrary) -> Result<Netlist, FixtureError> {
    spec.validate()?;
    let w = spec.width;
    let mut b = NetlistBuilder::new(lib, &spec.module_name(), ADDER_PREFIX);
    let a = b.inputs("a", w);
    let bb = b.inputs("b", w);
    let mut s: Vec<String> = Vec::with_capacity(w);
    let cout;
    match spec.family {
        Family::Aca => {
            let m = spec.param;
            let (sums, c) = ripple(&mut b, &a[..m], &bb[..m], None, |_| true, m == w);
            s.extend(sums.into_iter().flatten());
            let mut last = c;
            for i in m..w {
                let lo = i + 1 - m;
                let (sums, c) = ripple(&mut b, &a[lo..=i], &bb[lo..=i], None, |j| j + 1 == m, i + 1 == w);
                s.push(sums.into_iter().last().flatten().expect("top sum requested"));
                last = c;
            }
            cout = last.expect("carry out requested");
        }
        family => {
            let k = if family == Family::Exact { 0 } else { spec.param };
            let cin = lower_part(&mut b, family, &a[..k], &bb[..k], &mut s);
            let (sums, c) = ripple(&mut b, &a[k..], &bb[k..], cin, |_| true, true);
            s.extend(sums.into_iter().flatten());
            cout = c.expect("carry out requested");
        }
    }
    for (i, net) in s.iter().enumerate() {
        b.output(&format!("s{i}"), net);
    }
    b.output("cout", &cout);
    Ok(b.finish()?)
}

/// Build the approximate low bits into `s`; returns the carry into the
/// exact part.
fn lower_part(
    b: &mut NetlistBuilder,
    family: Family,
    a: &[String],
    bb: &[String],
    s: &mut Vec<String>,
) -> Option<String> {
    let k = a.len();
    match family {
        Family::Exact => None,
        Family::Lta => {
            s.extend((0..k).map(|_| b.gate("BUF", &["1'b0"])));
            None
        }
        Family::Lca => {
            s.extend(a.iter().map(|x| b.gate("BUF", &[x])));
            None
        }
        Family::Loa => {
            s.extend((0..k).map(|i| b.gate("OR2", &[&a[i], &bb[i]])));
            (k > 0).then(|| b.gate("AND2", &[&a[k - 1], &bb[k - 1]]))
        }
        Family::EtaI => {
            // force[i] = OR of generates at positions i+1..k-1
            let mut force: Vec<Option<String>> = vec![None; k];
            for i in (0..k.saturating_sub(1)).rev() {
                let g = b.gate("AND2", &[&a[i + 1], &bb[i + 1]]);
                force[i] = Some(match &force[i + 1] {
                    Some(f) => b.gate("OR2", &[&g, f]),
                    None => g,
                });
            }
            for i in 0..k {
                let x = b.gate("XOR2", &[&a[i], &bb[i]]);
                s.push(match &force[i] {
                    Some(f) => b.gate("OR2", &[&x, f]),
                    None => x,
                });
            }
            None
        }
        Family::Aca => unreachable!("ACA has no lower part"),
    }
}

/// Gate count of the exact ripple-carry adder of width `w`.
pub fn exact_gate_count(w: usize) -> usize {
    if w == 0 {
        0
    } else {
        2 + 4 * (w - 1)
    }
}
