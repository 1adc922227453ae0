// SPDX-License-Identifier: Apache-2.0

//! Command-line front end. All randomness derives from `--seed`
//! (default `$APPGNN_SEED`, else 0).

mod commands;
mod io;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::gat::{HeadCombine, HiddenMode};
use crate::sampler::SamplingMode;

pub use commands::run;

#[derive(Debug, Parser)]
#[command(name = "appgnn", version, about = "Gate-level netlist sub-circuit classification with graph attention")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Cell library file (`NAME <inputs> [pins...]` per line); default built-in 24 cells.
    #[arg(long)]
    pub lib: Option<PathBuf>,
    /// Class map file (`class [instance-prefix]` per line); default 5 classes.
    #[arg(long)]
    pub classes: Option<PathBuf>,
    /// Master seed; sub-seeds are derived per stage.
    #[arg(long, env = "APPGNN_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Process files sequentially.
    #[arg(long)]
    pub single_thread: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate adder fixtures or exact reference circuits as netlists.
    Gen(GenArgs),
    /// Convert netlists into graph JSON files.
    Convert(ConvertArgs),
    /// Sample one graph (node removal with datapaths).
    Sample(SampleArgs),
    /// Sample every input graph at several levels.
    Augment(AugmentArgs),
    /// Train a model; writes checkpoint.json and history.csv.
    Train(TrainArgs),
    /// Evaluate a checkpoint; writes report.json and area_accuracy.csv.
    Eval(EvalArgs),
    /// Aggregate evaluation reports per circuit family.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub common: Common,
    /// Adder family: exact, lta, lca, loa, eta-i, aca.
    #[arg(long, conflicts_with = "kind")]
    pub family: Option<String>,
    /// Exact circuit kind: adder, multiplier, comparator, multiplexer, subtractor.
    #[arg(long)]
    pub kind: Option<String>,
    /// Bit widths.
    #[arg(long, value_delimiter = ',', required = true)]
    pub width: Vec<usize>,
    /// Approximation parameters (k for lower-part adders, m for ACA).
    #[arg(long = "param", visible_alias = "k", visible_alias = "m", value_delimiter = ',')]
    pub params: Vec<usize>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub common: Common,
    /// Netlist files or directories of `.v` files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Label sidecar (`instance class` per line); only with a single netlist.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: Common,
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SamplingMode::Leaf)]
    pub mode: SamplingMode,
    /// Number of initially selected nodes.
    #[arg(long)]
    pub n: usize,
    /// Recompute survivor features on the sampled structure.
    #[arg(long)]
    pub recompute_features: bool,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Where to write the removal report (JSON).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[command(flatten)]
    pub common: Common,
    /// Graph JSON files or directories.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = SamplingMode::Leaf)]
    pub mode: SamplingMode,
    /// Levels (selected-node counts); default 1..=9 capped per graph.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<usize>>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Training graph JSON files or directories.
    #[arg(long, required = true, num_args = 1..)]
    pub train: Vec<PathBuf>,
    /// Validation graphs; without them the training graphs are split.
    #[arg(long, num_args = 1..)]
    pub val: Vec<PathBuf>,
    /// Split fractions train,val,test used when `--val` is absent.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "0.65,0.2,0.15")]
    pub splits: Vec<f64>,
    /// Keep sampled variants of one source circuit in the same split.
    #[arg(long)]
    pub group_by_source: bool,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 3000)]
    pub roots: usize,
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    #[arg(long, default_value_t = 1)]
    pub batches: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.1)]
    pub dropout: f64,
    #[arg(long, default_value_t = 256)]
    pub hidden: usize,
    #[arg(long, default_value_t = 8)]
    pub heads: usize,
    #[arg(long, value_enum, default_value_t = HiddenMode::Total)]
    pub hidden_mode: HiddenMode,
    #[arg(long, value_enum, default_value_t = HeadCombine::Concat)]
    pub last_combine: HeadCombine,
    #[arg(long, value_enum, default_value_t = Precision::F32)]
    pub precision: Precision,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Labeled graph JSON files or directories.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// `report.json` files (one per evaluation run).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, short)]
    pub out: PathBuf,
}
