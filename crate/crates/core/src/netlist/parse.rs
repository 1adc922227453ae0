// SPDX-License-Identifier: Apache-2.0

//! Parser for the structural netlist subset:
//!
//! ```text
//! module <name>;
//! input a, b;
//! output y;
//! wire n1;
//! NAND2 U1 (.A(a), .B(b), .Y(n1));
//! INV U2 (.A(n1), .Y(y));
//! endmodule
//! ```

use std::collections::{HashMap, HashSet, VecDeque};

use super::{constant_value, CellLibrary, Driver, GateInst, NetId, Netlist, NetlistError};

#[derive(Debug, Clone, PartialEq)]
struct Token<'a> {
    text: &'a str,
    line: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token<'_>>, NetlistError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut line = 1;
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            b'/' if bytes.get(i + 1) == Some(&b'/') => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'/' if bytes.get(i + 1) == Some(&b'*') => {
                let start = line;
                i += 2;
                loop {
                    if i + 1 >= bytes.len() {
                        return Err(NetlistError::Syntax {
                            line: start,
                            msg: "unterminated block comment".into(),
                        });
                    }
                    if bytes[i] == b'*' && bytes[i + 1] == b'/' {
                        i += 2;
                        break;
                    }
                    if bytes[i] == b'\n' {
                        line += 1;
                    }
                    i += 1;
                }
            }
            b'(' | b')' | b',' | b';' | b'.' => {
                tokens.push(Token { text: &text[i..i + 1], line });
                i += 1;
            }
            _ => {
                let start = i;
                while i < bytes.len()
                    && !bytes[i].is_ascii_whitespace()
                    && !matches!(bytes[i], b'(' | b')' | b',' | b';' | b'.' | b'/')
                {
                    i += 1;
                }
                if start == i {
                    // a lone '/' that does not start a comment
                    return Err(NetlistError::Syntax {
                        line,
                        msg: "unexpected `/`".into(),
                    });
                }
                tokens.push(Token { text: &text[start..i], line });
            }
        }
    }
    Ok(tokens)
}

struct Cursor<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn line(&self) -> usize {
        self.tokens
            .get(self.pos)
            .or(self.tokens.last())
            .map_or(1, |t| t.line)
    }

    fn err(&self, msg: impl Into<String>) -> NetlistError {
        NetlistError::Syntax { line: self.line(), msg: msg.into() }
    }

    fn next(&mut self) -> Result<&'a str, NetlistError> {
        let t = self
            .tokens
            .get(self.pos)
            .ok_or_else(|| self.err("unexpected end of input (missing `endmodule`?)"))?;
        self.pos += 1;
        Ok(t.text)
    }

    fn peek(&self) -> Option<&'a str> {
        self.tokens.get(self.pos).map(|t| t.text)
    }

    fn expect(&mut self, want: &str) -> Result<(), NetlistError> {
        let got = self.next()?;
        if got == want {
            Ok(())
        } else {
            self.pos -= 1;
            Err(self.err(format!("expected `{want}`, found `{got}`")))
        }
    }

    fn ident(&mut self) -> Result<&'a str, NetlistError> {
        let t = self.next()?;
        if matches!(t, "(" | ")" | "," | ";" | ".") {
            self.pos -= 1;
            return Err(self.err(format!("expected identifier, found `{t}`")));
        }
        Ok(t)
    }

    /// `name (, name)* ;`
    fn name_list(&mut self) -> Result<Vec<&'a str>, NetlistError> {
        let mut names = vec![self.ident()?];
        loop {
            match self.next()? {
                "," => names.push(self.ident()?),
                ";" => return Ok(names),
                other => {
                    self.pos -= 1;
                    return Err(self.err(format!("expected `,` or `;`, found `{other}`")));
                }
            }
        }
    }
}

struct RawInstance<'a> {
    cell: &'a str,
    name: &'a str,
    conns: Vec<(&'a str, &'a str)>,
}

/// Parse and validate a structural netlist against `lib`. Labels are left
/// unassigned; see [`Netlist::assign_labels`].
pub fn parse_netlist(text: &str, lib: &CellLibrary) -> Result<Netlist, NetlistError> {
    let mut cur = Cursor { tokens: tokenize(text)?, pos: 0 };
    cur.expect("module")?;
    let name = cur.ident()?.to_string();
    if cur.peek() == Some("(") {
        // port list is implied by the input/output declarations
        while cur.next()? != ")" {}
    }
    cur.expect(";")?;

    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut wires = Vec::new();
    let mut instances = Vec::new();
    loop {
        let kw = cur.ident()?;
        match kw {
            "endmodule" => break,
            "input" => inputs.extend(cur.name_list()?),
            "output" => outputs.extend(cur.name_list()?),
            "wire" => wires.extend(cur.name_list()?),
            "assign" | "reg" | "always" | "inout" => {
                cur.pos -= 1;
                return Err(cur.err(format!("`{kw}` is outside the supported subset")));
            }
            cell => {
                let inst = cur.ident()?;
                cur.expect("(")?;
                let mut conns = Vec::new();
                if cur.peek() != Some(")") {
                    loop {
                        if cur.peek() != Some(".") {
                            return Err(cur.err(format!(
                                "instance `{inst}`: only named connections `.PIN(net)` are supported"
                            )));
                        }
                        cur.expect(".")?;
                        let pin = cur.ident()?;
                        cur.expect("(")?;
                        let net = cur.ident()?;
                        cur.expect(")")?;
                        conns.push((pin, net));
                        match cur.next()? {
                            "," => continue,
                            ")" => break,
                            other => {
                                cur.pos -= 1;
                                return Err(cur.err(format!("expected `,` or `)`, found `{other}`")));
                            }
                        }
                    }
                } else {
                    cur.expect(")")?;
                }
                cur.expect(";")?;
                instances.push(RawInstance { cell, name: inst, conns });
            }
        }
    }
    if let Some(extra) = cur.peek() {
        return Err(cur.err(format!("unexpected `{extra}` after endmodule")));
    }
    build(name, &inputs, &outputs, &wires, &instances, lib)
}

fn build(
    name: String,
    inputs: &[&str],
    outputs: &[&str],
    wires: &[&str],
    instances: &[RawInstance<'_>],
    lib: &CellLibrary,
) -> Result<Netlist, NetlistError> {
    let mut nets: Vec<String> = Vec::new();
    let mut index: HashMap<String, NetId> = HashMap::new();
    let mut drivers: Vec<Option<Driver>> = Vec::new();

    let mut primary_inputs = Vec::new();
    for &n in inputs {
        if index.contains_key(n) {
            return Err(NetlistError::DuplicateNet(n.to_string()));
        }
        index.insert(n.to_string(), nets.len());
        primary_inputs.push(nets.len());
        nets.push(n.to_string());
        drivers.push(Some(Driver::Input));
    }
    let mut primary_outputs = Vec::new();
    for &n in outputs {
        match index.get(n) {
            // an input may be passed straight through to an output
            Some(&id) if drivers[id] == Some(Driver::Input) && !primary_outputs.contains(&id) => {
                primary_outputs.push(id)
            }
            Some(_) => return Err(NetlistError::DuplicateNet(n.to_string())),
            None => {
                index.insert(n.to_string(), nets.len());
                primary_outputs.push(nets.len());
                nets.push(n.to_string());
                drivers.push(None);
            }
        }
    }
    for &n in wires {
        if index.contains_key(n) {
            return Err(NetlistError::DuplicateNet(n.to_string()));
        }
        index.insert(n.to_string(), nets.len());
        nets.push(n.to_string());
        drivers.push(None);
    }

    let mut gates = Vec::with_capacity(instances.len());
    let mut seen_inst = HashSet::new();
    for inst in instances {
        if !seen_inst.insert(inst.name) {
            return Err(NetlistError::DuplicateInstance(inst.name.to_string()));
        }
        let cell_id = lib.lookup(inst.cell).ok_or_else(|| NetlistError::UnknownCell {
            instance: inst.name.to_string(),
            cell: inst.cell.to_string(),
        })?;
        let cell = lib.cell(cell_id);
        let pins_err = |msg: String| NetlistError::Pins { instance: inst.name.to_string(), msg };

        let mut by_pin: HashMap<&str, &str> = HashMap::new();
        for &(pin, net) in &inst.conns {
            if by_pin.insert(pin, net).is_some() {
                return Err(pins_err(format!("pin `{pin}` connected twice")));
            }
            if pin != cell.output_pin && !cell.input_pins.iter().any(|p| p == pin) {
                return Err(pins_err(format!("cell `{}` has no pin `{pin}`", cell.name)));
            }
        }

        let mut in_nets = Vec::with_capacity(cell.arity());
        for pin in &cell.input_pins {
            let net = *by_pin
                .get(pin.as_str())
                .ok_or_else(|| pins_err(format!("input pin `{pin}` is unconnected")))?;
            let id = match index.get(net) {
                Some(&id) => id,
                None => match constant_value(net) {
                    Some(v) => {
                        index.insert(net.to_string(), nets.len());
                        nets.push(net.to_string());
                        drivers.push(Some(Driver::Constant(v)));
                        nets.len() - 1
                    }
                    None => {
                        return Err(NetlistError::DanglingInput {
                            instance: inst.name.to_string(),
                            net: net.to_string(),
                        })
                    }
                },
            };
            in_nets.push(id);
        }

        let out_net = *by_pin
            .get(cell.output_pin.as_str())
            .ok_or_else(|| pins_err(format!("output pin `{}` is unconnected", cell.output_pin)))?;
        let out_id = *index.get(out_net).ok_or_else(|| NetlistError::UndeclaredNet {
            instance: inst.name.to_string(),
            net: out_net.to_string(),
        })?;
        if drivers[out_id].is_some() {
            return Err(NetlistError::MultipleDrivers { net: out_net.to_string() });
        }
        drivers[out_id] = Some(Driver::Gate(gates.len()));
        gates.push(GateInst {
            name: inst.name.to_string(),
            cell: cell_id,
            inputs: in_nets,
            output: out_id,
            label: None,
        });
    }

    for gate in &gates {
        for &net in &gate.inputs {
            if drivers[net].is_none() {
                return Err(NetlistError::DanglingInput {
                    instance: gate.name.clone(),
                    net: nets[net].clone(),
                });
            }
        }
    }
    for &po in &primary_outputs {
        if drivers[po].is_none() {
            return Err(NetlistError::UndrivenOutput(nets[po].clone()));
        }
    }
    // unread wires may stay undriven
    let drivers: Vec<Driver> = drivers
        .into_iter()
        .map(|d| d.unwrap_or(Driver::Undriven))
        .collect();

    let topo = topological_order(&gates, &drivers).map_err(|g| {
        NetlistError::CombinationalCycle(gates[g].name.clone())
    })?;

    Ok(Netlist { name, nets, primary_inputs, primary_outputs, gates, drivers, topo })
}

/// Kahn's algorithm over gate-to-gate dependencies. On failure returns a
/// gate that lies on (or behind) a cycle.
fn topological_order(gates: &[GateInst], drivers: &[Driver]) -> Result<Vec<usize>, usize> {
    let n = gates.len();
    let mut indeg = vec![0usize; n];
    let mut sinks: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (g, gate) in gates.iter().enumerate() {
        for &net in &gate.inputs {
            if let Driver::Gate(src) = drivers[net] {
                indeg[g] += 1;
                sinks[src].push(g);
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&g| indeg[g] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(g) = queue.pop_front() {
        order.push(g);
        for &s in &sinks[g] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                queue.push_back(s);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).find(|&g| indeg[g] > 0).unwrap())
    }
}
