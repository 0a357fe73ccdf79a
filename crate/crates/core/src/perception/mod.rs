//! Pole detection from stereo point clouds.
//!
//! The pipeline merges per-camera clouds into the platform frame, downsamples
//! them on a voxel grid, drops sparse outliers and then votes for the pole
//! centre in a horizontal 2D histogram.

mod cloud;
mod detect;
mod filter;
mod synth;

pub use cloud::{camera_extrinsic, merge_clouds, read_xyz, write_xyz, Frame, PointCloud};
pub use detect::{detect_pole, run_pipeline, Detection, FilterParams};
pub use filter::{radius_outlier_removal, voxel_filter};
pub use synth::{synth_cloud, CROSSARM_THICKNESS};

#[derive(Debug, thiserror::Error)]
pub enum PerceptionError {
    #[error("expected a {expected} cloud, got {found}")]
    FrameMismatch { expected: String, found: Frame },
    #[error("{0} clouds but {1} extrinsics")]
    ExtrinsicsMismatch(usize, usize),
    #[error("non-finite coordinate in point cloud")]
    NonFinite,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid filter parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
