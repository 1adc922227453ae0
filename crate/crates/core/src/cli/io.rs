// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use super::Common;
use crate::classes::ClassMap;
use crate::graph::CircuitGraph;
use crate::netlist::CellLibrary;

pub fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn library(common: &Common) -> Result<CellLibrary> {
    match &common.lib {
        None => Ok(CellLibrary::default_library()),
        Some(p) => CellLibrary::parse(&read(p)?).with_context(|| format!("library {}", p.display())),
    }
}

pub fn classes(common: &Common) -> Result<ClassMap> {
    match &common.classes {
        None => Ok(ClassMap::default()),
        Some(p) => ClassMap::parse(&read(p)?).with_context(|| format!("class map {}", p.display())),
    }
}

/// Files given directly plus the files with extension `ext` inside given
/// directories (sorted by name).
pub fn expand(inputs: &[PathBuf], ext: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|e| e == ext) && f.file_name().is_some_and(|n| n != "manifest.json"))
                .collect();
            found.sort();
            out.extend(found);
        } else if p.exists() {
            out.push(p.clone());
        } else {
            bail!("{} does not exist", p.display());
        }
    }
    if out.is_empty() {
        bail!("no .{ext} inputs found");
    }
    Ok(out)
}

pub fn read_graph(path: &Path, classes: &ClassMap) -> Result<CircuitGraph> {
    CircuitGraph::from_json(&read(path)?, classes).with_context(|| format!("graph {}", path.display()))
}

pub fn read_graphs(paths: &[PathBuf], classes: &ClassMap) -> Result<Vec<CircuitGraph>> {
    paths.iter().map(|p| read_graph(p, classes)).collect()
}

/// Label sidecar: `instance class` (whitespace or comma separated) per
/// line, `#` comments.
pub fn read_labels(path: &Path) -> Result<HashMap<String, String>> {
    let mut map = HashMap::new();
    for (i, raw) in read(path)?.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
        match toks.as_slice() {
            [inst, class] => {
                map.insert(inst.to_string(), class.to_string());
            }
            _ => bail!("{}:{}: expected `instance class`", path.display(), i + 1),
        }
    }
    Ok(map)
}

pub fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "graph".into())
}
