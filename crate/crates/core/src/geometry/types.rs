use nalgebra::{Point2, Point3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use super::GeometryError;

const ATTACH_TOLERANCE: f64 = 1e-9;

/// Pole, crossarm and wire layout together with its protection zone.
///
/// World frame is z-up; `pole_position` is where the pole centreline meets
/// the ground plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfrastructureModel {
    pub pole_position: Vector3<f64>,
    pub pole_height: f64,
    pub pole_radius: f64,
    pub crossarm_attach: Vector3<f64>,
    /// Half-length of the crossarm, measured from the attachment point.
    pub crossarm_radius: f64,
    /// Crossarm heading in the world frame; `None` when unknown.
    pub crossarm_yaw: Option<f64>,
    pub wire_count: u8,
    pub detection_disc_radius: f64,
    pub protection_zone: ProtectionZone,
}

/// T-shaped keep-out volume: a vertical cylinder around the pole plus a
/// horizontal slab running along the wires at crossarm height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtectionZone {
    pub cylinder_radius: f64,
    pub slab_height: f64,
    pub slab_width: f64,
    /// Heading of the wire run (the slab's long axis).
    pub slab_yaw: f64,
}

/// Soft assumption violations that do not prevent analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelWarning {
    PoleHeightOutOfRange(f64),
    PoleRadiusOutOfRange(f64),
}

impl InfrastructureModel {
    /// Single pole at the origin, 6 m tall, 0.2 m radius, 1.5 m crossarm and
    /// a 0.5 m detection disc.
    pub fn reference() -> Self {
        let pole_position = Vector3::zeros();
        let pole_height = 6.0;
        Self {
            pole_position,
            pole_height,
            pole_radius: 0.2,
            crossarm_attach: pole_position + Vector3::new(0.0, 0.0, pole_height),
            crossarm_radius: 1.5,
            crossarm_yaw: None,
            wire_count: 4,
            detection_disc_radius: 0.5,
            protection_zone: ProtectionZone {
                cylinder_radius: 2.0,
                slab_height: 4.0,
                slab_width: 2.2,
                slab_yaw: FRAC_PI_2,
            },
        }
    }

    /// Hard invariant check; soft range assumptions come back as warnings.
    pub fn validate(&self) -> Result<Vec<ModelWarning>, GeometryError> {
        let finite = self.pole_position.iter().all(|v| v.is_finite())
            && self.crossarm_attach.iter().all(|v| v.is_finite());
        if !finite {
            return Err(GeometryError::InvalidModel("non-finite position".into()));
        }
        if !(self.pole_height > 0.0 && self.pole_radius > 0.0) {
            return Err(GeometryError::InvalidModel(
                "pole height and radius must be positive".into(),
            ));
        }
        if !(0.5..=2.0).contains(&self.crossarm_radius) {
            return Err(GeometryError::InvalidModel(format!(
                "crossarm radius {} outside [0.5, 2]",
                self.crossarm_radius
            )));
        }
        let expected = self.pole_position + Vector3::new(0.0, 0.0, self.pole_height);
        if (self.crossarm_attach - expected).norm() > ATTACH_TOLERANCE {
            return Err(GeometryError::InvalidModel(
                "crossarm must attach to the pole top".into(),
            ));
        }
        if let Some(yaw) = self.crossarm_yaw {
            if !(0.0..std::f64::consts::TAU).contains(&yaw) {
                return Err(GeometryError::InvalidModel(format!(
                    "crossarm yaw {yaw} outside [0, 2pi)"
                )));
            }
        }
        if self.wire_count > 4 {
            return Err(GeometryError::InvalidModel("at most four wires".into()));
        }
        if self.detection_disc_radius <= 0.0 {
            return Err(GeometryError::InvalidModel(
                "detection disc radius must be positive".into(),
            ));
        }
        self.protection_zone.validate(self.pole_radius)?;

        let mut warnings = Vec::new();
        if !(6.0..=10.0).contains(&self.pole_height) {
            warnings.push(ModelWarning::PoleHeightOutOfRange(self.pole_height));
        }
        if !(0.2..=0.4).contains(&self.pole_radius) {
            warnings.push(ModelWarning::PoleRadiusOutOfRange(self.pole_radius));
        }
        Ok(warnings)
    }

    pub fn crossarm_height(&self) -> f64 {
        self.crossarm_attach.z
    }

    pub fn pole_xy(&self) -> Point2<f64> {
        Point2::new(self.pole_position.x, self.pole_position.y)
    }

    /// Horizontal distance from `p` to the pole centreline.
    pub fn horizontal_range(&self, p: &Point3<f64>) -> f64 {
        (p.xy() - self.pole_xy()).norm()
    }

    /// Height of `p` relative to the crossarm plane (positive above).
    pub fn delta_h(&self, p: &Point3<f64>) -> f64 {
        p.z - self.crossarm_height()
    }

    /// Whether `p` lies inside the protection zone.
    pub fn in_protection_zone(&self, p: &Point3<f64>) -> bool {
        let rel = p.coords - self.pole_position;
        self.protection_zone.contains_relative(&Vector3::new(
            rel.x,
            rel.y,
            p.z - self.crossarm_height(),
        ))
    }
}

impl ProtectionZone {
    pub fn validate(&self, pole_radius: f64) -> Result<(), GeometryError> {
        if self.cylinder_radius <= pole_radius {
            return Err(GeometryError::InvalidModel(format!(
                "zone radius {} must exceed pole radius {}",
                self.cylinder_radius, pole_radius
            )));
        }
        if self.slab_height <= 0.0 || self.slab_width <= 0.0 {
            return Err(GeometryError::InvalidModel(
                "slab dimensions must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Membership for a point given relative to the crossarm attachment
    /// (x, y horizontal offsets from the pole axis, z = height above crossarm).
    ///
    /// The cylinder runs from the ground up to the slab top; the slab is
    /// centred on the crossarm plane and unbounded along `slab_yaw`.
    pub fn contains_relative(&self, rel: &Vector3<f64>) -> bool {
        let top = 0.5 * self.slab_height;
        if rel.z > top {
            return false;
        }
        let radial = (rel.x * rel.x + rel.y * rel.y).sqrt();
        if radial <= self.cylinder_radius {
            return true;
        }
        let across = -rel.x * self.slab_yaw.sin() + rel.y * self.slab_yaw.cos();
        rel.z.abs() <= top && across.abs() <= 0.5 * self.slab_width
    }
}

/// One frustum sensor rigidly mounted on the platform at its centre of mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraSpec {
    pub yaw_offset: f64,
    /// Positive tilts the optical axis up.
    pub pitch_offset: f64,
    pub h_half_angle: f64,
    pub v_half_angle: f64,
    pub range: f64,
}

impl CameraSpec {
    /// Rotation taking camera-frame vectors (x optical axis, y left, z up)
    /// into the platform body frame.
    pub fn mount_rotation(&self) -> Rotation3<f64> {
        Rotation3::from_axis_angle(&Vector3::z_axis(), self.yaw_offset)
            * Rotation3::from_axis_angle(&Vector3::y_axis(), -self.pitch_offset)
    }

    /// Inward normals of the four frustum side planes in the camera frame;
    /// a direction `d` is inside the angular bounds iff every `n · d >= 0`.
    pub fn side_normals(&self) -> [Vector3<f64>; 4] {
        let (sh, ch) = self.h_half_angle.sin_cos();
        let (sv, cv) = self.v_half_angle.sin_cos();
        [
            Vector3::new(sh, -ch, 0.0),
            Vector3::new(sh, ch, 0.0),
            Vector3::new(sv, 0.0, -cv),
            Vector3::new(sv, 0.0, cv),
        ]
    }

    /// Whether a camera-frame point is inside the field of view.
    pub fn sees(&self, p: &Vector3<f64>) -> bool {
        p.norm() <= self.range && self.side_normals().iter().all(|n| n.dot(p) >= 0.0)
    }

    fn validate(&self) -> Result<(), GeometryError> {
        let angle_ok = |a: f64| a > 0.0 && a <= FRAC_PI_2;
        if !angle_ok(self.h_half_angle) || !angle_ok(self.v_half_angle) {
            return Err(GeometryError::InvalidSensor(
                "half-angles must lie in (0, pi/2]".into(),
            ));
        }
        if !(self.range > 0.0) {
            return Err(GeometryError::InvalidSensor(
                "range must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub cameras: Vec<CameraSpec>,
}

impl SensorModel {
    /// Single forward camera with +/-60 deg bounds and 4 m range.
    pub fn single_wide() -> Self {
        let a = 60f64.to_radians();
        Self {
            cameras: vec![CameraSpec {
                yaw_offset: 0.0,
                pitch_offset: 0.0,
                h_half_angle: a,
                v_half_angle: a,
                range: 4.0,
            }],
        }
    }

    /// Two cameras yawed +/-30 deg, each +/-30 deg by +/-23 deg.
    pub fn dual_rig() -> Self {
        let cam = |yaw: f64| CameraSpec {
            yaw_offset: yaw.to_radians(),
            pitch_offset: 0.0,
            h_half_angle: 30f64.to_radians(),
            v_half_angle: 23f64.to_radians(),
            range: 4.0,
        };
        Self {
            cameras: vec![cam(30.0), cam(-30.0)],
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(1..=2).contains(&self.cameras.len()) {
            return Err(GeometryError::InvalidSensor(
                "one or two cameras required".into(),
            ));
        }
        self.cameras.iter().try_for_each(CameraSpec::validate)
    }

    pub fn max_range(&self) -> f64 {
        self.cameras.iter().map(|c| c.range).fold(0.0, f64::max)
    }
}

/// Platform position and attitude. Pitch is positive nose-up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlatformPose {
    pub position: Point3<f64>,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

impl PlatformPose {
    pub fn level(position: Point3<f64>, yaw: f64) -> Self {
        Self {
            position,
            roll: 0.0,
            pitch: 0.0,
            yaw,
        }
    }

    /// Level pose at `position` whose x axis points at the pole centreline.
    pub fn facing_pole(position: Point3<f64>, infra: &InfrastructureModel) -> Self {
        let d = infra.pole_xy() - position.xy();
        Self::level(position, d.y.atan2(d.x))
    }

    /// Body-to-world rotation.
    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_axis_angle(&Vector3::z_axis(), self.yaw)
            * Rotation3::from_axis_angle(&Vector3::y_axis(), -self.pitch)
            * Rotation3::from_axis_angle(&Vector3::x_axis(), self.roll)
    }

    /// Checks roll and pitch against attitude limits.
    pub fn within_limits(&self, roll_limit: f64, pitch_limit: f64) -> bool {
        self.roll.abs() <= roll_limit && self.pitch.abs() <= pitch_limit
    }
}
