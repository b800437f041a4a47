//! Versioned JSON files for trained pipeline components.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use timelime_core::evaluate::PlanningStage;
use timelime_core::{Classifier, Discretizer, Normalizer};

pub const MODEL_FORMAT: &str = "timelime-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub project: String,
    pub normalizer: Normalizer,
    pub forest: Classifier,
    pub discretizer: Discretizer,
}

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model file: expected {MODEL_FORMAT} version {MODEL_VERSION}, found {format} version {version}")]
    Version { format: String, version: u32 },
}

impl ModelFile {
    pub fn from_stage(project: &str, stage: &PlanningStage) -> Self {
        ModelFile {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            project: project.into(),
            normalizer: stage.normalizer.clone(),
            forest: stage.forest.clone(),
            discretizer: stage.discretizer.clone(),
        }
    }
}

pub fn save_model(path: &Path, model: &ModelFile) -> Result<(), PersistError> {
    fs::write(path, serde_json::to_string(model)?)?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelFile, PersistError> {
    let model: ModelFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    if model.format != MODEL_FORMAT || model.version != MODEL_VERSION {
        return Err(PersistError::Version { format: model.format, version: model.version });
    }
    Ok(model)
}
