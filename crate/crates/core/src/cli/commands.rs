// SPDX-License-Identifier: Apache-2.0

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::io;
use super::{AugmentArgs, Cli, Command, ConvertArgs, EvalArgs, GenArgs, Precision, ReportArgs, SampleArgs, TrainArgs};
use crate::classes::ClassMap;
use crate::dataset::{
    self, gen_circuit, gen_fixture, make_group_splits, make_splits, CircuitKind, Family, FixtureSpec, ManifestEntry,
    Split,
};
use crate::graph::{build_graph, CircuitGraph, GraphMeta};
use crate::netlist::parse_netlist;
use crate::sampler::{sample, SamplingConfig, SamplingMode};
use crate::scalar::Scalar;
use crate::seed::derive_seed;
use crate::trainer::{self, checkpoint_scalar, Checkpoint, EvalReport, TrainConfig};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => gen(&a),
        Command::Convert(a) => convert(&a),
        Command::Sample(a) => sample_cmd(&a),
        Command::Augment(a) => augment(&a),
        Command::Train(a) => train(&a),
        Command::Eval(a) => eval(&a),
        Command::Report(a) => report(&a),
    }
}

fn mode_name(mode: SamplingMode) -> &'static str {
    match mode {
        SamplingMode::Random => "random",
        SamplingMode::Leaf => "leaf",
    }
}

fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let path = dir.join("manifest.json");
    if !path.exists() {
        return Ok(Vec::new());
    }
    serde_json::from_str(&io::read(&path)?).with_context(|| format!("manifest {}", path.display()))
}

fn gen(a: &GenArgs) -> Result<()> {
    let lib = io::library(&a.common)?;
    let mut written = Vec::new();
    if let Some(kind) = &a.kind {
        let kind = CircuitKind::parse(kind).ok_or_else(|| anyhow!("unknown circuit kind `{kind}`"))?;
        if !a.params.is_empty() {
            bail!("--param applies to adder families only");
        }
        for &w in &a.width {
            let n = gen_circuit(kind, w, &lib)?;
            let file = format!("{}.v", n.name);
            io::write(&a.out.join(&file), n.to_text(&lib))?;
            written.push(ManifestEntry {
                file,
                name: n.name.clone(),
                family: kind.name().to_string(),
                width: w,
                k: None,
                m: None,
                node_count: n.gates.len(),
                normalized_area: 1.0,
            });
        }
    } else {
        let family: Family = a.family.as_deref().unwrap_or("exact").parse()?;
        let params = match (family, a.params.is_empty()) {
            (Family::Exact, _) => vec![0],
            (_, true) => bail!("--param is required for {family}"),
            (_, false) => a.params.clone(),
        };
        for &w in &a.width {
            for &p in &params {
                let spec = FixtureSpec::new(family, w, p);
                let n = gen_fixture(&spec, &lib)?;
                let file = format!("{}.v", n.name);
                io::write(&a.out.join(&file), n.to_text(&lib))?;
                written.push(ManifestEntry::for_fixture(file, &spec, n.gates.len()));
            }
        }
    }
    let mut manifest = read_manifest(&a.out)?;
    manifest.retain(|e| !written.iter().any(|w| w.file == e.file));
    manifest.extend(written.iter().cloned());
    manifest.sort_by(|x, y| x.file.cmp(&y.file));
    io::write(&a.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    println!("wrote {} netlists to {}", written.len(), a.out.display());
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphListing {
    file: String,
    graph: String,
    nodes: usize,
    edges: usize,
}

fn convert(a: &ConvertArgs) -> Result<()> {
    let lib = io::library(&a.common)?;
    let classes = io::classes(&a.common)?;
    let files = io::expand(&a.inputs, "v")?;
    let sidecar = match &a.labels {
        Some(_) if files.len() != 1 => bail!("--labels requires exactly one netlist"),
        Some(p) => Some(io::read_labels(p)?),
        None => None,
    };
    let mut manifests: HashMap<PathBuf, HashMap<String, ManifestEntry>> = HashMap::new();
    for f in &files {
        let dir = f.parent().unwrap_or(Path::new(".")).to_path_buf();
        if let Entry::Vacant(slot) = manifests.entry(dir) {
            let entries = read_manifest(slot.key())?.into_iter().map(|e| (e.file.clone(), e)).collect();
            slot.insert(entries);
        }
    }
    let one = |f: &PathBuf| -> Result<CircuitGraph> {
        let text = io::read(f)?;
        let mut n = parse_netlist(&text, &lib).with_context(|| format!("{}", f.display()))?;
        n.assign_labels(&classes, sidecar.as_ref()).with_context(|| format!("{}", f.display()))?;
        let mut g = build_graph(&n, &lib);
        let dir = f.parent().unwrap_or(Path::new("."));
        let fname = f.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        if let Some(e) = manifests.get(dir).and_then(|m| m.get(&fname)) {
            g.meta = GraphMeta {
                family: Some(e.family.clone()),
                source: None,
                normalized_area: Some(e.normalized_area),
            };
        }
        Ok(g)
    };
    let graphs: Vec<Result<CircuitGraph>> = if a.common.single_thread {
        files.iter().map(one).collect()
    } else {
        files.par_iter().map(one).collect()
    };
    let graphs: Vec<CircuitGraph> = graphs.into_iter().collect::<Result<_>>()?;
    let mut listing = Vec::new();
    for (f, g) in files.iter().zip(&graphs) {
        let file = format!("{}.json", io::stem(f));
        io::write(&a.out.join(&file), g.to_json(&classes))?;
        listing.push(GraphListing { file, graph: g.name.clone(), nodes: g.len(), edges: g.num_edges() });
    }
    io::write(&a.out.join("manifest.json"), serde_json::to_string_pretty(&listing)?)?;
    println!("converted {} netlists into {}", graphs.len(), a.out.display());
    Ok(())
}

fn sample_cmd(a: &SampleArgs) -> Result<()> {
    let classes = io::classes(&a.common)?;
    let g = io::read_graph(&a.input, &classes)?;
    let seed = derive_seed(a.common.seed, &format!("sample/{}", g.name));
    let cfg = SamplingConfig { mode: a.mode, num_selected: a.n, seed, recompute_features: a.recompute_features };
    let mut s = sample(&g, &cfg).with_context(|| format!("sampling {}", a.input.display()))?;
    s.graph.name = format!("{}_{}{}", g.name, mode_name(a.mode), a.n);
    s.graph.meta = GraphMeta {
        family: g.meta.family.clone(),
        source: Some(g.meta.source.clone().unwrap_or_else(|| g.name.clone())),
        normalized_area: Some(g.meta.normalized_area.unwrap_or(1.0) * s.graph.len() as f64 / g.len() as f64),
    };
    io::write(&a.out, s.graph.to_json(&classes))?;
    if let Some(r) = &a.report {
        io::write(r, serde_json::to_string_pretty(&s.report)?)?;
    }
    println!(
        "{}: selected {}, removed {}, added {}; {} -> {} nodes",
        g.name,
        s.report.selected.len(),
        s.report.removed.len(),
        s.report.added.len(),
        g.len(),
        s.graph.len()
    );
    Ok(())
}

fn augment(a: &AugmentArgs) -> Result<()> {
    let classes = io::classes(&a.common)?;
    let graphs = io::read_graphs(&io::expand(&a.inputs, "json")?, &classes)?;
    let out = dataset::augment(&graphs, a.mode, a.levels.as_deref(), a.common.seed)?;
    let mut listing = Vec::new();
    for g in &out {
        let file = format!("{}.json", g.name);
        io::write(&a.out.join(&file), g.to_json(&classes))?;
        listing.push(GraphListing { file, graph: g.name.clone(), nodes: g.len(), edges: g.num_edges() });
    }
    io::write(&a.out.join("manifest.json"), serde_json::to_string_pretty(&listing)?)?;
    println!("wrote {} sampled graphs to {}", out.len(), a.out.display());
    Ok(())
}

fn train(a: &TrainArgs) -> Result<()> {
    let classes = io::classes(&a.common)?;
    let pool = io::read_graphs(&io::expand(&a.train, "json")?, &classes)?;
    let (train_set, val_set): (Vec<&CircuitGraph>, Vec<CircuitGraph>);
    let val_graphs;
    if a.val.is_empty() {
        let fractions: [f64; 3] =
            a.splits.clone().try_into().map_err(|_| anyhow!("--splits needs three comma-separated fractions"))?;
        let split_seed = derive_seed(a.common.seed, "split");
        let splits = if a.group_by_source {
            let groups: Vec<String> =
                pool.iter().map(|g| g.meta.source.clone().unwrap_or_else(|| g.name.clone())).collect();
            make_group_splits(&groups, fractions, split_seed)?
        } else {
            make_splits(pool.len(), fractions, split_seed)?
        };
        let assignment: BTreeMap<&str, Split> = pool.iter().map(|g| g.name.as_str()).zip(splits.iter().copied()).collect();
        io::write(&a.out.join("splits.json"), serde_json::to_string_pretty(&assignment)?)?;
        train_set = pool.iter().zip(&splits).filter(|(_, s)| **s == Split::Train).map(|(g, _)| g).collect();
        val_graphs = pool.iter().zip(&splits).filter(|(_, s)| **s == Split::Val).map(|(g, _)| g).collect::<Vec<_>>();
    } else {
        val_set = io::read_graphs(&io::expand(&a.val, "json")?, &classes)?;
        train_set = pool.iter().collect();
        val_graphs = val_set.iter().collect();
    }
    let cfg = TrainConfig {
        epochs: a.epochs,
        roots: a.roots,
        depth: a.depth,
        batches: a.batches,
        lr: a.lr,
        dropout: a.dropout,
        seed: a.common.seed,
        single_thread: a.common.single_thread,
        hidden: a.hidden,
        heads: a.heads,
        hidden_mode: a.hidden_mode,
        last_combine: a.last_combine,
    };
    match a.precision {
        Precision::F32 => train_with::<f32>(a, &train_set, &val_graphs, classes, cfg),
        Precision::F64 => train_with::<f64>(a, &train_set, &val_graphs, classes, cfg),
    }
}

fn train_with<T: Scalar>(
    a: &TrainArgs,
    train_set: &[&CircuitGraph],
    val: &[&CircuitGraph],
    classes: ClassMap,
    cfg: TrainConfig,
) -> Result<()> {
    let outcome = trainer::train::<T>(train_set, val, &classes, &cfg)?;
    let mut hist = Vec::new();
    trainer::write_history_csv(&outcome.history, &mut hist)?;
    io::write(&a.out.join("history.csv"), hist)?;
    let library = train_set[0].cells().to_vec();
    let ck = Checkpoint::new(&outcome, library, classes, cfg);
    io::write(&a.out.join("checkpoint.json"), ck.to_json())?;
    let best = outcome
        .best_epoch
        .and_then(|e| outcome.history[e - 1].val_acc.map(|v| format!("best epoch {e}, validation accuracy {v:.4}")))
        .unwrap_or_else(|| "no validation set".into());
    println!(
        "trained on {} graphs ({} validation) for {} epochs; {best}",
        train_set.len(),
        val.len(),
        outcome.history.len()
    );
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<()> {
    let text = io::read(&a.checkpoint).context("loading checkpoint")?;
    let scalar = checkpoint_scalar(&text).with_context(|| format!("checkpoint {}", a.checkpoint.display()))?;
    let report = match scalar.as_str() {
        "f32" => eval_with::<f32>(a, &text)?,
        "f64" => eval_with::<f64>(a, &text)?,
        other => bail!("unsupported checkpoint scalar `{other}`"),
    };
    io::write(&a.out.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    let mut csv = Vec::new();
    report.write_area_accuracy_csv(&mut csv)?;
    io::write(&a.out.join("area_accuracy.csv"), csv)?;
    println!(
        "{} graphs: node accuracy {:.4}, mean graph accuracy {:.4}",
        report.graphs.len(),
        report.accuracy,
        report.mean_graph_accuracy
    );
    Ok(())
}

fn eval_with<T: Scalar>(a: &EvalArgs, text: &str) -> Result<EvalReport> {
    let ck = Checkpoint::<T>::from_json(text).with_context(|| format!("checkpoint {}", a.checkpoint.display()))?;
    let graphs = io::read_graphs(&io::expand(&a.inputs, "json")?, &ck.classes)?;
    if let Some(g) = graphs.iter().find(|g| g.cells() != ck.library.as_slice()) {
        bail!("graph `{}` uses a different cell library than the checkpoint", g.name);
    }
    let refs: Vec<&CircuitGraph> = graphs.iter().collect();
    Ok(trainer::evaluate(&ck.model, &ck.standardizer, &ck.classes, &refs, a.common.single_thread)?)
}

/// Mean and sample standard deviation (0 for a single value).
pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn report(a: &ReportArgs) -> Result<()> {
    let runs: Vec<EvalReport> = a
        .inputs
        .iter()
        .map(|p| serde_json::from_str(&io::read(p)?).with_context(|| format!("report {}", p.display())))
        .collect::<Result<_>>()?;
    let mut per_family: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut area = csv::Writer::from_writer(Vec::new());
    area.write_record(["run", "circuit", "family", "normalized_area", "accuracy"])?;
    for (run, r) in runs.iter().enumerate() {
        let mut fam: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for g in &r.graphs {
            let f = g.family.clone().unwrap_or_else(|| "unknown".into());
            let e = fam.entry(f.clone()).or_default();
            e.0 += g.accuracy;
            e.1 += 1;
            let area_s = g.normalized_area.map(|x| x.to_string()).unwrap_or_default();
            area.write_record([run.to_string(), g.name.clone(), f, area_s, g.accuracy.to_string()])?;
        }
        for (f, (sum, n)) in fam {
            per_family.entry(f).or_default().push(sum / n as f64);
        }
    }
    let mut summary = csv::Writer::from_writer(Vec::new());
    summary.write_record(["family", "runs", "mean_accuracy", "std_accuracy"])?;
    println!("{:<14} {:>4} {:>10} {:>10}", "family", "runs", "mean", "std");
    for (f, xs) in &per_family {
        let (m, s) = mean_std(xs);
        summary.write_record([f.clone(), xs.len().to_string(), m.to_string(), s.to_string()])?;
        println!("{f:<14} {:>4} {m:>10.4} {s:>10.4}", xs.len());
    }
    io::write(&a.out.join("family_summary.csv"), summary.into_inner()?)?;
    io::write(&a.out.join("area_accuracy.csv"), area.into_inner()?)?;
    Ok(())
}
