//! Synthetic experiments: scene generation, schema-versioned JSON records and
//! the reports behind each CLI subcommand.
//!
//! Structured outputs are JSON tagged with [`SCHEMA`]; polyline data is CSV.
//! Floats are written in shortest round-trip form and parsed with exact
//! rounding, so write, read, write is byte-identical.

mod records;
mod reports;
mod scene;

pub use records::{
    CorrespondenceFile, CorrespondenceRecord, DepthMapFile, DepthRecord, ErrorStats,
    EstimateRecord, ExperimentRecord, GazeDeltas, PointRecord, Timings,
};
pub use reports::{
    essential_report, fixation_report, horopter_csv, reconstruct, run_estimate, EssentialReport,
    FixationReport,
};
pub use scene::{synthesize_scene, Region, SceneKind, SceneSpec};

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use crate::error::Error as GeometryError;

pub const SCHEMA: &str = "cyclovision/1";

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("malformed file: {0}")]
    Json(#[from] serde_json::Error),

    #[error("schema mismatch: {0}")]
    Schema(String),
}

impl SimError {
    /// 2 for input validation, 3 for file or schema problems, 4 for
    /// degenerate geometry and estimation failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Invalid(_) => 2,
            SimError::Io { .. } | SimError::Json(_) | SimError::Schema(_) => 3,
            SimError::Geometry(e) => match e {
                GeometryError::InvalidGaze(_) | GeometryError::RangeBelowMinimum { .. } => 2,
                _ => 4,
            },
        }
    }
}

pub type SimResult<T> = std::result::Result<T, SimError>;

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> SimResult<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

/// Reads and parses a JSON file, rejecting any schema tag other than
/// [`SCHEMA`].
pub fn read_json<T: DeserializeOwned>(path: &Path) -> SimResult<T> {
    let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_json(&text)
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> SimResult<T> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("schema").and_then(|s| s.as_str()) {
        Some(SCHEMA) => {}
        Some(other) => {
            return Err(SimError::Schema(format!(
                "expected {SCHEMA}, found {other}"
            )))
        }
        None => return Err(SimError::Schema("missing schema tag".into())),
    }
    serde_json::from_value(value).map_err(|e| SimError::Schema(e.to_string()))
}

pub fn write_text(path: &Path, text: &str) -> SimResult<()> {
    std::fs::write(path, text).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })
}
