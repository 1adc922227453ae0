// SPDX-License-Identifier: Apache-2.0

use super::{CellLibrary, Driver, Netlist, NetlistError};

impl Netlist {
    /// Evaluate 64 input patterns at once. `inputs[i]` holds one bit per
    /// pattern for the i-th primary input; the result holds one word per
    /// primary output, in declaration order.
    pub fn simulate_words(&self, lib: &CellLibrary, inputs: &[u64]) -> Result<Vec<u64>, NetlistError> {
        if inputs.len() != self.primary_inputs.len() {
            return Err(NetlistError::InputArity {
                expected: self.primary_inputs.len(),
                got: inputs.len(),
            });
        }
        let mut values = vec![0u64; self.nets.len()];
        for (net, driver) in self.drivers.iter().enumerate() {
            if let Driver::Constant(true) = driver {
                values[net] = !0;
            }
        }
        for (&net, &v) in self.primary_inputs.iter().zip(inputs) {
            values[net] = v;
        }
        let mut scratch = Vec::with_capacity(4);
        for &g in self.topo_order() {
            let gate = &self.gates[g];
            let cell = lib.cell(gate.cell);
            let f = cell
                .function
                .ok_or_else(|| NetlistError::NoSemantics(cell.name.clone()))?;
            scratch.clear();
            scratch.extend(gate.inputs.iter().map(|&n| values[n]));
            values[gate.output] = f.eval_words(&scratch);
        }
        Ok(self.primary_outputs.iter().map(|&n| values[n]).collect())
    }

    /// Evaluate a single input assignment (primary inputs in declaration
    /// order).
    pub fn simulate(&self, lib: &CellLibrary, inputs: &[bool]) -> Result<Vec<bool>, NetlistError> {
        let words: Vec<u64> = inputs.iter().map(|&b| if b { !0 } else { 0 }).collect();
        Ok(self
            .simulate_words(lib, &words)?
            .into_iter()
            .map(|w| w & 1 == 1)
            .collect())
    }
}
