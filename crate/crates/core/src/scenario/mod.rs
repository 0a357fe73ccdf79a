//! Scene and operator-trace files.
//!
//! Files are JSON with unit-bearing field names. Angles are stored in degrees
//! and converted to radians only when building the runtime models, so a file
//! survives a parse/serialize cycle byte for byte.

mod scene;
mod trace;

pub use scene::{
    CameraConfig, ControlConfig, CoverageConfig, EnvelopeConfig, FilterConfig,
    InfrastructureConfig, PerceptionConfig, PlatformConfig, RangeBiasConfig, SceneConfig,
    SensorConfig, SimSection, ZoneConfig,
};
pub use trace::{ModeEventConfig, SegmentConfig, TraceFile};

use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline; the canonical on-disk form.
pub fn to_canonical_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("config types always serialize");
    s.push('\n');
    s
}
