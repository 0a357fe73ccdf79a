use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::f64::consts::{FRAC_PI_2, TAU};

use super::{Frame, PointCloud};
use crate::geometry::{InfrastructureModel, PlatformPose, SensorModel};

/// Radius of the crossarm tube used by the generator.
pub const CROSSARM_THICKNESS: f64 = 0.05;
/// Samples per square metre on cylinder surfaces.
const SURFACE_DENSITY: f64 = 400.0;
/// Samples per metre along each wire.
const WIRE_DENSITY: f64 = 50.0;
const WIRE_HALF_LENGTH: f64 = 10.0;

struct Sample {
    point: Point3<f64>,
    /// Outward surface normal; `None` for wires, which are seen from anywhere.
    normal: Option<Vector3<f64>>,
}

/// Crossarm heading, falling back to the direction across the wire run.
pub(crate) fn crossarm_heading(infra: &InfrastructureModel) -> f64 {
    infra
        .crossarm_yaw
        .unwrap_or(infra.protection_zone.slab_yaw - FRAC_PI_2)
}

fn sample_structure(infra: &InfrastructureModel, rng: &mut ChaCha8Rng) -> Vec<Sample> {
    let mut out = Vec::new();
    let base = infra.pole_position;
    let top = infra.crossarm_attach;

    let n_pole = (TAU * infra.pole_radius * infra.pole_height * SURFACE_DENSITY).ceil() as usize;
    for _ in 0..n_pole {
        let th = rng.random::<f64>() * TAU;
        let z = rng.random::<f64>() * infra.pole_height;
        let n = Vector3::new(th.cos(), th.sin(), 0.0);
        out.push(Sample {
            point: Point3::from(base + infra.pole_radius * n + Vector3::new(0.0, 0.0, z)),
            normal: Some(n),
        });
    }

    let yaw = crossarm_heading(infra);
    let along = Vector3::new(yaw.cos(), yaw.sin(), 0.0);
    let across = Vector3::new(-yaw.sin(), yaw.cos(), 0.0);
    let rc = infra.crossarm_radius;
    let n_arm = (TAU * CROSSARM_THICKNESS * 2.0 * rc * SURFACE_DENSITY).ceil() as usize;
    for _ in 0..n_arm {
        let s = (2.0 * rng.random::<f64>() - 1.0) * rc;
        let phi = rng.random::<f64>() * TAU;
        let n = phi.cos() * across + phi.sin() * Vector3::z();
        out.push(Sample {
            point: Point3::from(top + s * along + CROSSARM_THICKNESS * n),
            normal: Some(n),
        });
    }

    let w = infra.wire_count as usize;
    let n_wire = (2.0 * WIRE_HALF_LENGTH * WIRE_DENSITY).ceil() as usize;
    for i in 0..w {
        let offset = if w == 1 {
            rc
        } else {
            -rc + 2.0 * rc * i as f64 / (w - 1) as f64
        };
        let anchor = top + offset * along + Vector3::new(0.0, 0.0, CROSSARM_THICKNESS);
        for _ in 0..n_wire {
            let t = (2.0 * rng.random::<f64>() - 1.0) * WIRE_HALF_LENGTH;
            out.push(Sample {
                point: Point3::from(anchor + t * across),
                normal: None,
            });
        }
    }
    out
}

/// Simulated camera clouds of the pole, crossarm and wires.
///
/// Returns one cloud per camera in that camera's frame. Cylinder back faces
/// are culled; there is no occlusion between structures. Noise is isotropic
/// Gaussian in the camera frame and dropout removes points independently.
pub fn synth_cloud(
    infra: &InfrastructureModel,
    sensor: &SensorModel,
    pose: &PlatformPose,
    noise_sigma: f64,
    dropout: f64,
    seed: u64,
) -> Vec<PointCloud> {
    assert!(noise_sigma >= 0.0, "noise sigma must be non-negative");
    assert!((0.0..1.0).contains(&dropout), "dropout must lie in [0, 1)");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = sample_structure(infra, &mut rng);
    let noise = Normal::new(0.0, noise_sigma).expect("finite sigma");
    let origin = pose.position;
    let body = pose.rotation();

    sensor
        .cameras
        .iter()
        .enumerate()
        .map(|(i, cam)| {
            let to_cam = (body * cam.mount_rotation()).inverse();
            let mut points = Vec::new();
            for s in &samples {
                let rel = s.point - origin;
                if s.normal.is_some_and(|n| n.dot(&rel) >= 0.0) {
                    continue;
                }
                let d = to_cam * rel;
                if !cam.sees(&d) {
                    continue;
                }
                let jitter = if noise_sigma > 0.0 {
                    Vector3::new(
                        noise.sample(&mut rng),
                        noise.sample(&mut rng),
                        noise.sample(&mut rng),
                    )
                } else {
                    Vector3::zeros()
                };
                if dropout > 0.0 && rng.random::<f64>() < dropout {
                    continue;
                }
                points.push(Point3::from(d + jitter));
            }
            PointCloud {
                points,
                frame: Frame::Camera(i),
            }
        })
        .collect()
}
