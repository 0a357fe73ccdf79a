use nalgebra::{Isometry3, Point3, Vector3};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::angle::wrap_pi;
use super::{merge_clouds, radius_outlier_removal, voxel_filter, Frame, PerceptionError, PointCloud};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub valid: bool,
    /// Horizontal distance from the platform to the pole centre.
    pub range: f64,
    /// Angle from the platform x axis to the pole centre, in (-pi, pi].
    pub bearing: f64,
    /// Platform height above the crossarm plane, when the pole top is seen.
    pub delta_h: Option<f64>,
    pub timestamp: f64,
}

impl Detection {
    pub fn invalid(timestamp: f64) -> Self {
        Self {
            valid: false,
            range: 0.0,
            bearing: 0.0,
            delta_h: None,
            timestamp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub voxel_size: f64,
    pub outlier_radius: f64,
    pub min_neighbors: usize,
    pub histogram_bin: f64,
    pub min_bin_count: usize,
    /// Half-width of the histogram around the platform; points beyond are
    /// ignored. Normally the sensor range.
    pub histogram_extent: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            voxel_size: 0.05,
            outlier_radius: 0.25,
            min_neighbors: 5,
            histogram_bin: 0.25,
            min_bin_count: 20,
            histogram_extent: 4.0,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<(), PerceptionError> {
        let positive = [
            self.voxel_size,
            self.outlier_radius,
            self.histogram_bin,
            self.histogram_extent,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) || self.min_neighbors == 0 || self.min_bin_count == 0
        {
            return Err(PerceptionError::InvalidParams(
                "all filter parameters must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Votes for the pole in a horizontal histogram of a platform-frame cloud.
///
/// The fullest bin wins; ties go to the bin whose centroid is nearest the
/// platform. The reported centre is the centroid of the points in the winning
/// bin and its eight neighbours.
pub fn detect_pole(
    cloud: &PointCloud,
    params: &FilterParams,
    timestamp: f64,
) -> Result<Detection, PerceptionError> {
    if cloud.frame != Frame::Platform {
        return Err(PerceptionError::FrameMismatch {
            expected: "platform".into(),
            found: cloud.frame,
        });
    }
    let ext = params.histogram_extent;
    let bin = params.histogram_bin;
    let mut bins: HashMap<(i64, i64), (Vector3<f64>, usize, f64)> = HashMap::new();
    for p in &cloud.points {
        if p.x.abs() >= ext || p.y.abs() >= ext {
            continue;
        }
        let k = (
            ((p.x + ext) / bin).floor() as i64,
            ((p.y + ext) / bin).floor() as i64,
        );
        let e = bins
            .entry(k)
            .or_insert((Vector3::zeros(), 0, f64::NEG_INFINITY));
        e.0 += p.coords;
        e.1 += 1;
        e.2 = e.2.max(p.z);
    }

    let best = bins
        .iter()
        .map(|(k, (sum, n, _))| (*k, Point3::from(sum / *n as f64), *n))
        .max_by(|a, b| {
            a.2.cmp(&b.2)
                .then_with(|| {
                    let ra = a.1.xy().coords.norm();
                    let rb = b.1.xy().coords.norm();
                    rb.total_cmp(&ra)
                })
                .then_with(|| b.0.cmp(&a.0))
        });

    let Some(((kx, ky), _, n)) = best else {
        return Ok(Detection::invalid(timestamp));
    };
    if n < params.min_bin_count {
        return Ok(Detection::invalid(timestamp));
    }

    // A pole wider than one bin spills into its neighbours; pooling the 3x3
    // block keeps the centroid from sliding along the visible arc.
    let (mut sum, mut count, mut top) = (Vector3::zeros(), 0usize, f64::NEG_INFINITY);
    for dx in -1..=1 {
        for dy in -1..=1 {
            if let Some((s, c, t)) = bins.get(&(kx + dx, ky + dy)) {
                sum += s;
                count += c;
                top = top.max(*t);
            }
        }
    }
    let center = sum / count as f64;
    Ok(Detection {
        valid: true,
        range: center.xy().norm(),
        bearing: wrap_pi(center.y.atan2(center.x)),
        delta_h: Some(-top),
        timestamp,
    })
}

/// Full pipeline: merge, voxel grid, outlier removal, histogram vote.
pub fn run_pipeline(
    clouds: &[PointCloud],
    extrinsics: &[Isometry3<f64>],
    params: &FilterParams,
    timestamp: f64,
) -> Result<Detection, PerceptionError> {
    let merged = merge_clouds(clouds, extrinsics)?;
    let down = voxel_filter(&merged, params.voxel_size);
    let clean = radius_outlier_removal(&down, params.outlier_radius, params.min_neighbors);
    detect_pole(&clean, params, timestamp)
}
