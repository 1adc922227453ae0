// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{TrainConfig, TrainOutcome};
use crate::classes::ClassMap;
use crate::gat::GatModel;
use crate::graph::Standardizer;
use crate::scalar::Scalar;

pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to classify new graphs with a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Checkpoint<T> {
    pub version: u32,
    /// `f32` or `f64`.
    pub scalar: String,
    pub library: Vec<String>,
    pub classes: ClassMap,
    pub standardizer: Standardizer,
    pub train: TrainConfig,
    pub best_epoch: Option<usize>,
    pub model: GatModel<T>,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("checkpoint version {0} is not supported (expected {CHECKPOINT_VERSION})")]
    Version(u32),
    #[error("checkpoint stores {found} parameters, expected {expected}")]
    Scalar { found: String, expected: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn scalar_name<T: Scalar>() -> String {
    std::any::type_name::<T>().to_string()
}

impl<T: Scalar> Checkpoint<T> {
    pub fn new(outcome: &TrainOutcome<T>, library: Vec<String>, classes: ClassMap, train: TrainConfig) -> Self {
        Self {
            version: CHECKPOINT_VERSION,
            scalar: scalar_name::<T>(),
            library,
            classes,
            standardizer: outcome.standardizer.clone(),
            train,
            best_epoch: outcome.best_epoch,
            model: outcome.model.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CheckpointError> {
        #[derive(Deserialize)]
        struct Header {
            version: u32,
            scalar: String,
        }
        let h: Header = serde_json::from_str(text)?;
        if h.version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(h.version));
        }
        if h.scalar != scalar_name::<T>() {
            return Err(CheckpointError::Scalar { found: h.scalar, expected: scalar_name::<T>() });
        }
        Ok(serde_json::from_str(text)?)
    }
}

/// Read only the scalar type recorded in a checkpoint.
pub fn checkpoint_scalar(text: &str) -> Result<String, CheckpointError> {
    #[derive(Deserialize)]
    struct Header {
        scalar: String,
    }
    Ok(serde_json::from_str::<Header>(text)?.scalar)
}
