// SPDX-License-Identifier: Apache-2.0

//! Mapping between sub-circuit class names and the integer ids the
//! classifier predicts.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassMap {
    names: Vec<String>,
    /// Instance-name prefix that implies each class, e.g. `add` for `add_U3`.
    prefixes: Vec<Option<String>>,
}

#[derive(Debug, thiserror::Error)]
pub enum ClassMapError {
    #[error("class map is empty")]
    Empty,
    #[error("duplicate class `{0}`")]
    Duplicate(String),
    #[error("line {0}: expected `<class> [prefix]`")]
    Line(usize),
}

impl Default for ClassMap {
    fn default() -> Self {
        Self::new(&[
            ("adder", "add"),
            ("multiplier", "mul"),
            ("comparator", "comp"),
            ("multiplexer", "mux"),
            ("subtractor", "sub"),
        ])
        .expect("default classes are unique")
    }
}

impl ClassMap {
    pub fn new(pairs: &[(&str, &str)]) -> Result<Self, ClassMapError> {
        Self::from_parts(
            pairs.iter().map(|(n, p)| (n.to_string(), Some(p.to_string()))).collect(),
        )
    }

    fn from_parts(parts: Vec<(String, Option<String>)>) -> Result<Self, ClassMapError> {
        if parts.is_empty() {
            return Err(ClassMapError::Empty);
        }
        let mut names = Vec::new();
        let mut prefixes = Vec::new();
        for (name, prefix) in parts {
            if names.contains(&name) {
                return Err(ClassMapError::Duplicate(name));
            }
            names.push(name);
            prefixes.push(prefix);
        }
        Ok(Self { names, prefixes })
    }

    /// One class per line: `name [instance-prefix]`; `#` comments. Line
    /// order is the class id.
    pub fn parse(text: &str) -> Result<Self, ClassMapError> {
        let mut parts = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                [name] => parts.push((name.to_string(), None)),
                [name, prefix] => parts.push((name.to_string(), Some(prefix.to_string()))),
                _ => return Err(ClassMapError::Line(i + 1)),
            }
        }
        Self::from_parts(parts)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Class implied by an instance name such as `mul_U17`.
    pub fn id_for_instance(&self, instance: &str) -> Option<usize> {
        let (prefix, _) = instance.split_once('_')?;
        self.prefixes
            .iter()
            .position(|p| p.as_deref() == Some(prefix))
    }

    pub fn prefix(&self, id: usize) -> Option<&str> {
        self.prefixes[id].as_deref()
    }
}
