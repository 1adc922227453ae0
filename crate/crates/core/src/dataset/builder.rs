// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::netlist::{parse_netlist, CellLibrary, Netlist, NetlistError};

/// Incremental construction of generated netlists. Gate outputs get fresh
/// wire names; [`NetlistBuilder::output`] later promotes a wire to a named
/// primary output.
pub(crate) struct NetlistBuilder<'a> {
    lib: &'a CellLibrary,
    name: String,
    prefix: String,
    inputs: Vec<String>,
    outputs: Vec<String>,
    wires: Vec<String>,
    gates: Vec<(String, String, Vec<String>, String)>,
    rename: HashMap<String, String>,
}

impl<'a> NetlistBuilder<'a> {
    pub fn new(lib: &'a CellLibrary, name: &str, prefix: &str) -> Self {
        Self {
            lib,
            name: name.to_string(),
            prefix: prefix.to_string(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            wires: Vec::new(),
            gates: Vec::new(),
            rename: HashMap::new(),
        }
    }

    pub fn input(&mut self, name: &str) -> String {
        self.inputs.push(name.to_string());
        name.to_string()
    }

    pub fn inputs(&mut self, stem: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| self.input(&format!("{stem}{i}"))).collect()
    }

    /// Instantiate `cell` on `ins` and return its output net.
    pub fn gate(&mut self, cell: &str, ins: &[&str]) -> String {
        let out = format!("n{}", self.wires.len());
        self.wires.push(out.clone());
        let inst = format!("{}_U{}", self.prefix, self.gates.len() + 1);
        self.gates.push((cell.to_string(), inst, ins.iter().map(|s| s.to_string()).collect(), out.clone()));
        out
    }

    /// Expose `net` as primary output `name`. A wire driven by a gate is
    /// renamed in place; anything else gets a `BUF`.
    pub fn output(&mut self, name: &str, net: &str) {
        let is_wire = self.wires.iter().any(|w| w == net) && !self.rename.contains_key(net);
        let net = if is_wire { net.to_string() } else { self.gate("BUF", &[net]) };
        self.rename.insert(net, name.to_string());
        self.outputs.push(name.to_string());
    }

    fn net<'s>(&'s self, n: &'s str) -> &'s str {
        self.rename.get(n).map_or(n, String::as_str)
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "module {};", self.name).unwrap();
        writeln!(s, "input {};", self.inputs.join(", ")).unwrap();
        writeln!(s, "output {};", self.outputs.join(", ")).unwrap();
        let wires: Vec<&str> = self.wires.iter().filter(|w| !self.rename.contains_key(*w)).map(String::as_str).collect();
        if !wires.is_empty() {
            writeln!(s, "wire {};", wires.join(", ")).unwrap();
        }
        for (cell, inst, ins, out) in &self.gates {
            let def = &self.lib.cells()[self.lib.lookup(cell).unwrap_or_else(|| panic!("generator uses unknown cell {cell}"))];
            let mut pins: Vec<String> =
                def.input_pins.iter().zip(ins).map(|(p, n)| format!(".{p}({})", self.net(n))).collect();
            pins.push(format!(".{}({})", def.output_pin, self.net(out)));
            writeln!(s, "{cell} {inst} ({});", pins.join(", ")).unwrap();
        }
        s.push_str("endmodule\n");
        s
    }

    pub fn finish(self) -> Result<Netlist, NetlistError> {
        parse_netlist(&self.text(), self.lib)
    }
}

/// Sums of a ripple-carry adder over the given operand bits. Only the sum
/// bits selected by `need_sum` and (optionally) the carry out are built.
/// Bits without carry in are half adders (`XOR2`/`AND2`); full adders use
/// `p = XOR2(a, b)`, `s = XOR2(p, c)`, `c' = INV(AOI22(a, b, p, c))`.
pub(crate) fn ripple(
    b: &mut NetlistBuilder,
    xs: &[String],
    ys: &[String],
    cin: Option<String>,
    need_sum: impl Fn(usize) -> bool,
    need_cout: bool,
) -> (Vec<Option<String>>, Option<String>) {
    let n = xs.len();
    let mut carry = cin;
    let mut sums = Vec::with_capacity(n);
    for j in 0..n {
        let want_carry = j + 1 < n || need_cout;
        let (x, y) = (xs[j].as_str(), ys[j].as_str());
        match carry.take() {
            None => {
                sums.push(need_sum(j).then(|| b.gate("XOR2", &[x, y])));
                carry = want_carry.then(|| b.gate("AND2", &[x, y]));
            }
            Some(c) => {
                let p = b.gate("XOR2", &[x, y]);
                sums.push(need_sum(j).then(|| b.gate("XOR2", &[&p, &c])));
                if want_carry {
                    let cn = b.gate("AOI22", &[x, y, &p, &c]);
                    carry = Some(b.gate("INV", &[&cn]));
                }
            }
        }
    }
    (sums, carry)
}
