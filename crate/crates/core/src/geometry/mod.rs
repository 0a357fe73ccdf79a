//! Sensor coverage analysis on the crossarm plane.

mod coverage;
mod polygon;
mod types;
mod zone;

pub use coverage::{
    clip_to_disc, coverage_at, coverage_at_resolution, coverage_sweep, coverage_sweep_envelope,
    fov_footprint, sweep_pose, Attitude, AttitudeEnvelope, CoverageCell, CoverageGrid,
    CoverageResult, Interval, DEFAULT_ANGULAR_RESOLUTION, DEFAULT_GRID_STEP,
};
pub use polygon::{segments_for, Polygon};
pub use types::{
    CameraSpec, InfrastructureModel, ModelWarning, PlatformPose, ProtectionZone, SensorModel,
};
pub use zone::{recommend_zone, DEFAULT_METRIC_FLOOR};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid infrastructure model: {0}")]
    InvalidModel(String),
    #[error("invalid sensor model: {0}")]
    InvalidSensor(String),
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("no grid cell reaches the metric floor {0}")]
    NoSafeZone(f64),
}
