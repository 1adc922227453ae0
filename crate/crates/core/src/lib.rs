// SPDX-License-Identifier: Apache-2.0

//! Approximation-aware functional reverse engineering of gate-level
//! netlists with graph attention networks.

pub mod classes;
pub mod graph;
pub mod netlist;
pub mod scalar;
pub mod sampler;
pub mod gat;
pub mod dataset;
pub mod seed;
pub mod trainer;
pub mod cli;

pub use classes::ClassMap;
pub use graph::CircuitGraph;
pub use netlist::CellLibrary;

pub type GatModelF32 = gat::GatModel<f32>;
pub type GatModelF64 = gat::GatModel<f64>;
pub type CheckpointF32 = trainer::Checkpoint<f32>;
pub type CheckpointF64 = trainer::Checkpoint<f64>;
pub type TrainOutcomeF32 = trainer::TrainOutcome<f32>;
pub type TrainOutcomeF64 = trainer::TrainOutcome<f64>;
