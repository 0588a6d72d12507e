//! Pipeline, artifact formats and table reproduction on top of
//! `switchsynth-core`.

pub mod artifacts;
pub mod config;
pub mod inspect;
pub mod pipeline;
pub mod tables;

use std::path::{Path, PathBuf};

use switchsynth_core::gain::GainError;
use switchsynth_core::geometry::GeometryError;
use switchsynth_core::plant::PlantError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("plant: {0}")]
    Plant(#[from] PlantError),
    #[error("partition: {0}")]
    Geometry(#[from] GeometryError),
    #[error("gain bound: {0}")]
    Gain(#[from] GainError),
    #[error("artifact: {0}")]
    Artifact(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    /// 2 for anything wrong with the input, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::Plant(_) | Error::Geometry(_) | Error::Artifact(_) | Error::Json(_) => 2,
            Error::Gain(_) | Error::Io { .. } => 1,
        }
    }
}

pub const EXIT_INFEASIBLE: u8 = 3;
