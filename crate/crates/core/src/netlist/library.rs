// SPDX-License-Identifier: Apache-2.0

//! Cell library description: the ordered set of gate types a netlist may
//! instantiate. The order of cells fixes the feature-vector layout.

use std::collections::HashMap;

use super::NetlistError;

/// Name of the cell that leaf sampling inserts in place of removed outputs.
pub const BUF_CELL: &str = "BUF";

const SEQUENTIAL_PREFIXES: &[&str] = &["DFF", "SDFF", "EDFF", "LATCH", "DLH", "DLL", "DHL"];

/// Boolean semantics of a built-in cell family.
///
/// Input order follows the cell's pin order (`A`, `B`, `C`, `D` for the
/// default library). `Mux2` selects `B` when its third input is 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellFunction {
    Buf,
    Inv,
    And,
    Nand,
    Or,
    Nor,
    Xor,
    Xnor,
    /// `!(A&B | C)`
    Aoi21,
    /// `!(A&B | C&D)`
    Aoi22,
    /// `!((A|B) & C)`
    Oai21,
    /// `!((A|B) & (C|D))`
    Oai22,
    Mux2,
    Maj3,
}

impl CellFunction {
    /// Infer the function of a cell from its name and arity. Returns `None`
    /// for names outside the built-in families.
    pub fn infer(name: &str, arity: usize) -> Option<Self> {
        let upper = name.to_ascii_uppercase();
        let fixed = |f: CellFunction, n: usize| (arity == n).then_some(f);
        match upper.as_str() {
            "BUF" | "CLKBUF" => return fixed(Self::Buf, 1),
            "INV" => return fixed(Self::Inv, 1),
            "AOI21" => return fixed(Self::Aoi21, 3),
            "AOI22" => return fixed(Self::Aoi22, 4),
            "OAI21" => return fixed(Self::Oai21, 3),
            "OAI22" => return fixed(Self::Oai22, 4),
            "MUX2" => return fixed(Self::Mux2, 3),
            "MAJ3" => return fixed(Self::Maj3, 3),
            _ => {}
        }
        // Variadic families carry their arity as a numeric suffix.
        let split = upper.find(|c: char| c.is_ascii_digit())?;
        let (stem, digits) = upper.split_at(split);
        let n: usize = digits.parse().ok()?;
        if n != arity || n < 2 {
            return None;
        }
        match stem {
            "AND" => Some(Self::And),
            "NAND" => Some(Self::Nand),
            "OR" => Some(Self::Or),
            "NOR" => Some(Self::Nor),
            "XOR" => Some(Self::Xor),
            "XNOR" => Some(Self::Xnor),
            _ => None,
        }
    }

    /// Evaluate on 64 input patterns at once, one pattern per bit lane.
    pub fn eval_words(self, inputs: &[u64]) -> u64 {
        let all = |f: fn(u64, u64) -> u64, init: u64| inputs.iter().fold(init, |acc, &x| f(acc, x));
        match self {
            Self::Buf => inputs[0],
            Self::Inv => !inputs[0],
            Self::And => all(|a, b| a & b, !0),
            Self::Nand => !all(|a, b| a & b, !0),
            Self::Or => all(|a, b| a | b, 0),
            Self::Nor => !all(|a, b| a | b, 0),
            Self::Xor => all(|a, b| a ^ b, 0),
            Self::Xnor => !all(|a, b| a ^ b, 0),
            Self::Aoi21 => !((inputs[0] & inputs[1]) | inputs[2]),
            Self::Aoi22 => !((inputs[0] & inputs[1]) | (inputs[2] & inputs[3])),
            Self::Oai21 => !((inputs[0] | inputs[1]) & inputs[2]),
            Self::Oai22 => !((inputs[0] | inputs[1]) & (inputs[2] | inputs[3])),
            Self::Mux2 => (inputs[0] & !inputs[2]) | (inputs[1] & inputs[2]),
            Self::Maj3 => {
                (inputs[0] & inputs[1]) | (inputs[0] & inputs[2]) | (inputs[1] & inputs[2])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellDef {
    pub name: String,
    pub input_pins: Vec<String>,
    pub output_pin: String,
    pub function: Option<CellFunction>,
}

impl CellDef {
    pub fn arity(&self) -> usize {
        self.input_pins.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellLibrary {
    cells: Vec<CellDef>,
    index: HashMap<String, usize>,
}

/// The 24-cell library used by the built-in fixture generators.
pub const DEFAULT_LIBRARY: &str = "\
# default 24-cell combinational library: NAME <num_inputs>
INV 1
BUF 1
CLKBUF 1
AND2 2
AND3 3
AND4 4
NAND2 2
NAND3 3
NAND4 4
OR2 2
OR3 3
OR4 4
NOR2 2
NOR3 3
NOR4 4
XOR2 2
XNOR2 2
XOR3 3
AOI21 3
AOI22 4
OAI21 3
OAI22 4
MUX2 3
MAJ3 3
";

fn default_pin_names(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| {
            if i < 26 {
                char::from(b'A' + i as u8).to_string()
            } else {
                format!("I{i}")
            }
        })
        .collect()
}

impl CellLibrary {
    /// Parse the line-oriented library format: one `NAME <num_inputs>` per
    /// line, optionally followed by explicit input pin names and the output
    /// pin name. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, NetlistError> {
        let mut cells = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let line_no = lineno + 1;
            let mut tokens = line.split_whitespace();
            let name = tokens.next().unwrap().to_string();
            let count: usize = tokens
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| NetlistError::Library {
                    line: line_no,
                    msg: format!("expected `{name} <num_inputs>`"),
                })?;
            let rest: Vec<String> = tokens.map(str::to_string).collect();
            let (input_pins, output_pin) = if rest.is_empty() {
                (default_pin_names(count), "Y".to_string())
            } else if rest.len() == count + 1 {
                let mut rest = rest;
                let out = rest.pop().unwrap();
                (rest, out)
            } else {
                return Err(NetlistError::Library {
                    line: line_no,
                    msg: format!(
                        "cell {name} lists {} pin names, expected {} inputs plus one output",
                        rest.len(),
                        count
                    ),
                });
            };
            let function = CellFunction::infer(&name, count);
            cells.push(CellDef { name, input_pins, output_pin, function });
        }
        Self::from_cells(cells)
    }

    pub fn from_cells(cells: Vec<CellDef>) -> Result<Self, NetlistError> {
        let mut index = HashMap::new();
        for (i, cell) in cells.iter().enumerate() {
            let upper = cell.name.to_ascii_uppercase();
            if SEQUENTIAL_PREFIXES.iter().any(|p| upper.starts_with(p)) {
                return Err(NetlistError::SequentialCell(cell.name.clone()));
            }
            if cell.input_pins.is_empty() {
                return Err(NetlistError::NoInputs(cell.name.clone()));
            }
            let mut pins: Vec<&str> = cell.input_pins.iter().map(String::as_str).collect();
            pins.push(&cell.output_pin);
            pins.sort_unstable();
            if pins.windows(2).any(|w| w[0] == w[1]) {
                return Err(NetlistError::DuplicatePin {
                    cell: cell.name.clone(),
                });
            }
            if index.insert(cell.name.clone(), i).is_some() {
                return Err(NetlistError::DuplicateCell(cell.name.clone()));
            }
        }
        Ok(Self { cells, index })
    }

    pub fn default_library() -> Self {
        Self::parse(DEFAULT_LIBRARY).expect("built-in library is valid")
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[CellDef] {
        &self.cells
    }

    pub fn cell(&self, id: usize) -> &CellDef {
        &self.cells[id]
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn names(&self) -> Vec<String> {
        self.cells.iter().map(|c| c.name.clone()).collect()
    }

    /// Index of the `BUF` cell. Leaf sampling cannot run without one.
    pub fn buf_id(&self) -> Result<usize, NetlistError> {
        self.lookup(BUF_CELL).ok_or(NetlistError::MissingBuf)
    }

    /// Serialize back into the line format, always with explicit pin names.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.cells {
            out.push_str(&format!(
                "{} {} {} {}\n",
                c.name,
                c.arity(),
                c.input_pins.join(" "),
                c.output_pin
            ));
        }
        out
    }
}
