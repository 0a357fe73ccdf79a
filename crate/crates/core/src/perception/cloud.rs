use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{BufRead, Write};

use super::PerceptionError;
use crate::geometry::CameraSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Frame {
    Camera(usize),
    Platform,
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frame::Camera(i) => write!(f, "camera_{i}"),
            Frame::Platform => f.write_str("platform"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Point3<f64>>,
    pub frame: Frame,
}

impl PointCloud {
    pub fn new(points: Vec<Point3<f64>>, frame: Frame) -> Result<Self, PerceptionError> {
        if points.iter().any(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(PerceptionError::NonFinite);
        }
        Ok(Self { points, frame })
    }

    pub fn empty(frame: Frame) -> Self {
        Self {
            points: Vec::new(),
            frame,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Re-tags and transforms the cloud into the platform frame.
    pub fn to_platform(&self, extrinsic: &Isometry3<f64>) -> Result<PointCloud, PerceptionError> {
        if self.frame == Frame::Platform {
            return Err(PerceptionError::FrameMismatch {
                expected: "camera".into(),
                found: self.frame,
            });
        }
        Ok(PointCloud {
            points: self.points.iter().map(|p| extrinsic * p).collect(),
            frame: Frame::Platform,
        })
    }
}

/// Camera-to-platform transform for a camera mounted at the platform origin.
pub fn camera_extrinsic(cam: &CameraSpec) -> Isometry3<f64> {
    Isometry3::from_parts(
        Translation3::identity(),
        UnitQuaternion::from_rotation_matrix(&cam.mount_rotation()),
    )
}

/// Concatenates camera clouds in the platform frame, cloud `k` transformed by
/// `extrinsics[k]`.
pub fn merge_clouds(
    clouds: &[PointCloud],
    extrinsics: &[Isometry3<f64>],
) -> Result<PointCloud, PerceptionError> {
    if clouds.len() != extrinsics.len() {
        return Err(PerceptionError::ExtrinsicsMismatch(
            clouds.len(),
            extrinsics.len(),
        ));
    }
    let mut points = Vec::with_capacity(clouds.iter().map(PointCloud::len).sum());
    for (cloud, ext) in clouds.iter().zip(extrinsics) {
        points.extend(cloud.to_platform(ext)?.points);
    }
    Ok(PointCloud {
        points,
        frame: Frame::Platform,
    })
}

/// Writes one `x y z` triple per line using shortest round-trip formatting.
pub fn write_xyz<W: Write>(cloud: &PointCloud, w: W) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(w);
    for p in &cloud.points {
        writeln!(w, "{} {} {}", p.x, p.y, p.z)?;
    }
    w.flush()
}

/// Parses an XYZ file. Blank lines and lines starting with `#` are skipped.
pub fn read_xyz<R: BufRead>(r: R, frame: Frame) -> Result<PointCloud, PerceptionError> {
    let mut points = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = t
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e: std::num::ParseFloatError| PerceptionError::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        if vals.len() != 3 {
            return Err(PerceptionError::Parse {
                line: i + 1,
                message: format!("expected 3 values, found {}", vals.len()),
            });
        }
        points.push(Point3::new(vals[0], vals[1], vals[2]));
    }
    PointCloud::new(points, frame)
}
