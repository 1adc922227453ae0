// SPDX-License-Identifier: Apache-2.0

//! Flattened combinational gate-level netlists.
//!
//! A [`Netlist`] is always validated: every net has exactly one driver,
//! every gate pin is connected, and the gates admit a topological order.

mod library;
mod parse;
mod sim;

use std::collections::HashMap;

pub use library::{CellDef, CellFunction, CellLibrary, BUF_CELL, DEFAULT_LIBRARY};
pub use parse::parse_netlist;

use crate::classes::ClassMap;

pub type NetId = usize;

#[derive(Debug, thiserror::Error)]
pub enum NetlistError {
    #[error("library line {line}: {msg}")]
    Library { line: usize, msg: String },
    #[error("duplicate cell `{0}` in library")]
    DuplicateCell(String),
    #[error("cell `{0}` has no input pins")]
    NoInputs(String),
    #[error("cell `{cell}` repeats a pin name")]
    DuplicatePin { cell: String },
    #[error("sequential cell `{0}` is not supported")]
    SequentialCell(String),
    #[error("library has no `BUF` cell (required by leaf sampling)")]
    MissingBuf,
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("instance `{instance}` uses unknown cell `{cell}`")]
    UnknownCell { instance: String, cell: String },
    #[error("instance `{instance}`: {msg}")]
    Pins { instance: String, msg: String },
    #[error("duplicate instance name `{0}`")]
    DuplicateInstance(String),
    #[error("net `{0}` declared twice")]
    DuplicateNet(String),
    #[error("net `{net}` has multiple drivers")]
    MultipleDrivers { net: String },
    #[error("instance `{instance}` input `{net}` is not driven by any gate or primary input")]
    DanglingInput { instance: String, net: String },
    #[error("instance `{instance}` drives undeclared net `{net}`")]
    UndeclaredNet { instance: String, net: String },
    #[error("primary output `{0}` is not driven")]
    UndrivenOutput(String),
    #[error("combinational cycle through instance `{0}`")]
    CombinationalCycle(String),
    #[error("cell `{0}` has no boolean semantics")]
    NoSemantics(String),
    #[error("expected {expected} input values, got {got}")]
    InputArity { expected: usize, got: usize },
    #[error("label sidecar names unknown instance `{0}`")]
    UnknownLabelInstance(String),
    #[error("class `{0}` is not in the class map")]
    UnknownClass(String),
}

/// What drives a net.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Driver {
    Input,
    Constant(bool),
    Gate(usize),
    /// A declared wire that nothing drives and nothing reads.
    Undriven,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateInst {
    pub name: String,
    pub cell: usize,
    /// One net per input pin, in the cell's pin order.
    pub inputs: Vec<NetId>,
    pub output: NetId,
    pub label: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Netlist {
    pub name: String,
    /// Net names: primary inputs, then primary outputs, then wires, then any
    /// constant literals in order of first use.
    pub nets: Vec<String>,
    pub primary_inputs: Vec<NetId>,
    pub primary_outputs: Vec<NetId>,
    pub gates: Vec<GateInst>,
    drivers: Vec<Driver>,
    topo: Vec<usize>,
}

pub(crate) fn constant_value(name: &str) -> Option<bool> {
    match name.to_ascii_lowercase().as_str() {
        "1'b0" | "1'h0" | "1'd0" => Some(false),
        "1'b1" | "1'h1" | "1'd1" => Some(true),
        _ => None,
    }
}

impl Netlist {
    pub fn driver(&self, net: NetId) -> Driver {
        self.drivers[net]
    }

    /// Gate indices in a topological order (drivers before sinks).
    pub fn topo_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn is_primary_input(&self, net: NetId) -> bool {
        self.drivers[net] == Driver::Input
    }

    pub fn net_id(&self, name: &str) -> Option<NetId> {
        self.nets.iter().position(|n| n == name)
    }

    /// Index of the gate named `name`.
    pub fn gate_id(&self, name: &str) -> Option<usize> {
        self.gates.iter().position(|g| g.name == name)
    }

    /// Assign ground-truth labels. Sidecar entries win; otherwise the
    /// instance-name prefix (text before the first `_`) is looked up in
    /// `classes`. Gates matching neither stay unlabeled.
    pub fn assign_labels(
        &mut self,
        classes: &ClassMap,
        sidecar: Option<&HashMap<String, String>>,
    ) -> Result<(), NetlistError> {
        if let Some(sidecar) = sidecar {
            for inst in sidecar.keys() {
                if self.gate_id(inst).is_none() {
                    return Err(NetlistError::UnknownLabelInstance(inst.clone()));
                }
            }
        }
        for gate in &mut self.gates {
            gate.label = match sidecar.and_then(|s| s.get(&gate.name)) {
                Some(class) => Some(
                    classes
                        .id(class)
                        .ok_or_else(|| NetlistError::UnknownClass(class.clone()))?,
                ),
                None => classes.id_for_instance(&gate.name),
            };
        }
        Ok(())
    }

    /// Write the netlist back out in the structural format accepted by
    /// [`parse_netlist`].
    pub fn to_text(&self, lib: &CellLibrary) -> String {
        let join = |ids: &[NetId]| {
            ids.iter()
                .map(|&i| self.nets[i].as_str())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let wires: Vec<NetId> = (0..self.nets.len())
            .filter(|&n| {
                !self.primary_inputs.contains(&n)
                    && !self.primary_outputs.contains(&n)
                    && !matches!(self.drivers[n], Driver::Constant(_))
            })
            .collect();
        let mut out = format!("module {};\n", self.name);
        if !self.primary_inputs.is_empty() {
            out.push_str(&format!("input {};\n", join(&self.primary_inputs)));
        }
        if !self.primary_outputs.is_empty() {
            out.push_str(&format!("output {};\n", join(&self.primary_outputs)));
        }
        if !wires.is_empty() {
            out.push_str(&format!("wire {};\n", join(&wires)));
        }
        for g in &self.gates {
            let cell = lib.cell(g.cell);
            let mut conns: Vec<String> = cell
                .input_pins
                .iter()
                .zip(&g.inputs)
                .map(|(pin, &net)| format!(".{}({})", pin, self.nets[net]))
                .collect();
            conns.push(format!(".{}({})", cell.output_pin, self.nets[g.output]));
            out.push_str(&format!("{} {} ({});\n", cell.name, g.name, conns.join(", ")));
        }
        out.push_str("endmodule\n");
        out
    }
}
