use nalgebra::{Point2, Point3, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use super::polygon::Polygon;
use super::types::{CameraSpec, InfrastructureModel, PlatformPose, SensorModel};
use super::GeometryError;

pub const DEFAULT_ANGULAR_RESOLUTION: f64 = 0.5 * PI / 180.0;
pub const DEFAULT_GRID_STEP: f64 = 0.1;

/// Clip results below this area (m^2) are rounding residue from disjoint
/// inputs and are dropped.
const SLIVER_AREA: f64 = 1e-12;

/// Intersection of one camera's field of view with the plane `z = plane_height`.
///
/// The range sphere cuts the plane in a disc; each frustum side plane cuts it
/// in a half-plane. The footprint is the disc n-gon clipped by those four
/// half-planes, so it is convex and exact up to the disc discretisation.
pub fn fov_footprint(
    sensor: &CameraSpec,
    pose: &PlatformPose,
    plane_height: f64,
    angular_resolution: f64,
) -> Polygon {
    footprint_with_phase(sensor, pose, plane_height, angular_resolution, 0.0)
}

pub(crate) fn footprint_with_phase(
    sensor: &CameraSpec,
    pose: &PlatformPose,
    plane_height: f64,
    angular_resolution: f64,
    phase: f64,
) -> Polygon {
    let o = pose.position;
    let dz = plane_height - o.z;
    if dz.abs() >= sensor.range {
        return Polygon::empty();
    }
    let rho = (sensor.range * sensor.range - dz * dz).sqrt();
    let mut poly = Polygon::disc(o.xy(), rho, angular_resolution, phase);

    let rot = pose.rotation() * sensor.mount_rotation();
    for n_cam in sensor.side_normals() {
        let n = rot * n_cam;
        // n . (p - o) >= 0 with p = (x, y, plane_height)
        let normal = Vector2::new(n.x, n.y);
        let offset = n.z * dz - normal.dot(&o.xy().coords);
        if normal.norm() < 1e-12 {
            if n.z * dz < 0.0 {
                return Polygon::empty();
            }
            continue;
        }
        poly = poly.clip_half_plane(normal, offset);
        if poly.is_empty() {
            break;
        }
    }
    poly
}

/// Intersection of `polygon` with the disc n-gon at the given resolution.
pub fn clip_to_disc(
    polygon: &Polygon,
    center: Point2<f64>,
    radius: f64,
    angular_resolution: f64,
) -> Polygon {
    polygon.clip_convex(&Polygon::disc(center, radius, angular_resolution, 0.0))
}

/// Per-pose coverage of the crossarm disc and the pole detection disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    /// One footprint per camera on the crossarm plane.
    pub footprints: Vec<Polygon>,
    pub crossarm_coverage: Vec<Polygon>,
    pub pole_coverage: Vec<Polygon>,
    pub crossarm_metric: f64,
    pub pole_metric: f64,
}

pub fn coverage_at(
    infra: &InfrastructureModel,
    sensor: &SensorModel,
    pose: &PlatformPose,
) -> CoverageResult {
    coverage_at_resolution(infra, sensor, pose, DEFAULT_ANGULAR_RESOLUTION)
}

pub fn coverage_at_resolution(
    infra: &InfrastructureModel,
    sensor: &SensorModel,
    pose: &PlatformPose,
    angular_resolution: f64,
) -> CoverageResult {
    let center = infra.pole_xy();
    let rel = pose.position.xy() - center;
    // Aligning every n-gon with the bearing makes results exactly invariant
    // under rotation about the pole.
    let phase = if rel.norm() > 0.0 {
        rel.y.atan2(rel.x)
    } else {
        0.0
    };
    let plane = infra.crossarm_height();

    let footprints: Vec<Polygon> = sensor
        .cameras
        .iter()
        .map(|c| footprint_with_phase(c, pose, plane, angular_resolution, phase))
        .collect();

    let crossarm_disc = Polygon::disc(center, infra.crossarm_radius, angular_resolution, phase);
    let pole_disc = Polygon::disc(
        center,
        infra.detection_disc_radius,
        angular_resolution,
        phase,
    );

    let (crossarm_coverage, crossarm_metric) = union_metric(&footprints, &crossarm_disc);
    let (pole_coverage, pole_metric) = union_metric(&footprints, &pole_disc);

    CoverageResult {
        footprints,
        crossarm_coverage,
        pole_coverage,
        crossarm_metric,
        pole_metric,
    }
}

/// Clips every footprint to `disc` and returns the pieces plus the covered
/// fraction of the disc, using inclusion-exclusion for the two-camera case.
fn union_metric(footprints: &[Polygon], disc: &Polygon) -> (Vec<Polygon>, f64) {
    // The disc is usually the smaller polygon, so it is the clip subject.
    let pieces: Vec<Polygon> = footprints
        .iter()
        .map(|f| disc.clip_convex(f))
        .map(|p| {
            if p.area() <= SLIVER_AREA {
                Polygon::empty()
            } else {
                p
            }
        })
        .collect();
    let mut area: f64 = pieces.iter().map(Polygon::area).sum();
    if pieces.len() == 2 {
        area -= pieces[0].clip_convex(&footprints[1]).area();
    }
    let metric = (area / disc.area()).clamp(0.0, 1.0);
    (pieces, metric)
}

/// Closed interval used for sweep axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub min: f64,
    pub max: f64,
}

impl Interval {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    /// Grid values from `min` to `max` inclusive, snapped to 1e-9.
    pub fn samples(&self, step: f64) -> Vec<f64> {
        let n = ((self.max - self.min) / step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| ((self.min + i as f64 * step) * 1e9).round() / 1e9)
            .collect()
    }
}

/// Platform attitude held constant over a sweep. Yaw is always set to face
/// the pole.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Attitude {
    pub roll: f64,
    pub pitch: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageCell {
    pub r: f64,
    pub dh: f64,
    pub crossarm_metric: f64,
    pub pole_metric: f64,
}

/// Dense (r_q, dh) grid. Cells are stored row-major with `dh` as the outer
/// index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageGrid {
    pub r_values: Vec<f64>,
    pub dh_values: Vec<f64>,
    pub cells: Vec<CoverageCell>,
}

impl CoverageGrid {
    pub fn cell(&self, ir: usize, idh: usize) -> &CoverageCell {
        &self.cells[idh * self.r_values.len() + ir]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[CoverageCell]> {
        self.cells.chunks(self.r_values.len().max(1))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(w);
        writeln!(w, "r_q,dh,crossarm_metric,pole_metric")?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{},{},{}",
                c.r, c.dh, c.crossarm_metric, c.pole_metric
            )?;
        }
        w.flush()
    }
}

/// Pose used for a sweep cell: on the +x ray from the pole, facing it.
pub fn sweep_pose(
    infra: &InfrastructureModel,
    r: f64,
    dh: f64,
    attitude: Attitude,
) -> PlatformPose {
    let p = infra.pole_position;
    PlatformPose {
        position: Point3::new(p.x + r, p.y, infra.crossarm_height() + dh),
        roll: attitude.roll,
        pitch: attitude.pitch,
        yaw: PI,
    }
}

/// Range of attitudes the platform may hold while flying a sweep cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttitudeEnvelope {
    pub roll_limit: f64,
    pub pitch_limit: f64,
    /// Sampling step for both axes.
    pub step: f64,
}

impl AttitudeEnvelope {
    /// +/-20 deg pitch, level roll, sampled every 5 deg.
    pub fn reference() -> Self {
        Self {
            roll_limit: 0.0,
            pitch_limit: 20f64.to_radians(),
            step: 5f64.to_radians(),
        }
    }

    pub fn samples(&self) -> Vec<Attitude> {
        let axis = |limit: f64| {
            if limit <= 0.0 {
                return vec![0.0];
            }
            let n = (limit / self.step).ceil() as i64;
            (-n..=n)
                .map(|i| (i as f64 * self.step).clamp(-limit, limit))
                .collect::<Vec<_>>()
        };
        let pitches = axis(self.pitch_limit);
        axis(self.roll_limit)
            .into_iter()
            .flat_map(|roll| pitches.iter().map(move |&pitch| Attitude { roll, pitch }))
            .collect()
    }
}

/// Like [`coverage_sweep`] but each cell holds the worst metric over every
/// attitude in the envelope, i.e. the coverage that is guaranteed while the
/// platform manoeuvres within its attitude limits.
pub fn coverage_sweep_envelope(
    infra: &InfrastructureModel,
    sensor: &SensorModel,
    r_range: Interval,
    dh_range: Interval,
    grid_step: f64,
    envelope: AttitudeEnvelope,
) -> Result<CoverageGrid, GeometryError> {
    if !(envelope.step > 0.0) || envelope.roll_limit < 0.0 || envelope.pitch_limit < 0.0 {
        return Err(GeometryError::InvalidSweep(
            "invalid attitude envelope".into(),
        ));
    }
    let attitudes = envelope.samples();
    sweep_with(r_range, dh_range, grid_step, |r, dh| {
        attitudes.iter().fold((1.0f64, 1.0f64), |(c, p), &att| {
            let res = coverage_at(infra, sensor, &sweep_pose(infra, r, dh, att));
            (c.min(res.crossarm_metric), p.min(res.pole_metric))
        })
    })
}

pub fn coverage_sweep(
    infra: &InfrastructureModel,
    sensor: &SensorModel,
    r_range: Interval,
    dh_range: Interval,
    grid_step: f64,
    attitude: Attitude,
) -> Result<CoverageGrid, GeometryError> {
    sweep_with(r_range, dh_range, grid_step, |r, dh| {
        let res = coverage_at(infra, sensor, &sweep_pose(infra, r, dh, attitude));
        (res.crossarm_metric, res.pole_metric)
    })
}

fn sweep_with<F>(
    r_range: Interval,
    dh_range: Interval,
    grid_step: f64,
    metrics: F,
) -> Result<CoverageGrid, GeometryError>
where
    F: Fn(f64, f64) -> (f64, f64) + Sync,
{
    let valid = |i: &Interval| i.min.is_finite() && i.max.is_finite() && i.min <= i.max;
    if !(grid_step > 0.0) {
        return Err(GeometryError::InvalidSweep(
            "grid step must be positive".into(),
        ));
    }
    if !valid(&r_range) || !valid(&dh_range) {
        return Err(GeometryError::InvalidSweep("empty sweep range".into()));
    }
    let r_values = r_range.samples(grid_step);
    let dh_values = dh_range.samples(grid_step);
    let cells = dh_values
        .par_iter()
        .flat_map_iter(|&dh| {
            let metrics = &metrics;
            r_values.iter().map(move |&r| {
                let (crossarm_metric, pole_metric) = metrics(r, dh);
                CoverageCell {
                    r,
                    dh,
                    crossarm_metric,
                    pole_metric,
                }
            })
        })
        .collect();
    Ok(CoverageGrid {
        r_values,
        dh_values,
        cells,
    })
}
