use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::path::Path;

use super::{read_json, ScenarioError};
use crate::control::{ControlParams, DeadbandMode};
use crate::geometry::{
    AttitudeEnvelope, CameraSpec, InfrastructureModel, Interval, ProtectionZone, SensorModel,
};
use crate::perception::FilterParams;
use crate::simulator::{PerceptionMode, PlantParams, RangeBias, SimConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    pub name: String,
    pub infrastructure: InfrastructureConfig,
    pub sensor: SensorConfig,
    pub control: ControlConfig,
    pub filter: FilterConfig,
    pub sim: SimSection,
    #[serde(default)]
    pub coverage: CoverageConfig,
    #[serde(default)]
    pub platform: PlatformConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfrastructureConfig {
    pub pole_position_m: [f64; 3],
    pub pole_height_m: f64,
    pub pole_radius_m: f64,
    /// Defaults to the pole top.
    #[serde(default)]
    pub crossarm_attach_m: Option<[f64; 3]>,
    pub crossarm_radius_m: f64,
    #[serde(default)]
    pub crossarm_yaw_deg: Option<f64>,
    pub wire_count: u8,
    pub detection_disc_radius_m: f64,
    pub protection_zone: ZoneConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneConfig {
    pub cylinder_radius_m: f64,
    pub slab_height_m: f64,
    pub slab_width_m: f64,
    pub slab_yaw_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    pub cameras: Vec<CameraConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub yaw_offset_deg: f64,
    pub pitch_offset_deg: f64,
    pub h_half_angle_deg: f64,
    pub v_half_angle_deg: f64,
    pub range_m: f64,
}

/// Control gains. The zone radius comes from the infrastructure section and
/// the rate and speed limits from the sim section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    pub kp_per_s: f64,
    pub kd: f64,
    pub yaw_deadband_deg: f64,
    pub deadband_mode: DeadbandMode,
    pub eta_margin_deg: f64,
    pub threat_distance_m: f64,
    pub hysteresis_m: f64,
    pub v_gain: f64,
    pub min_egress_speed_mps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    pub voxel_size_m: f64,
    pub outlier_radius_m: f64,
    pub min_neighbors: usize,
    pub histogram_bin_m: f64,
    pub min_bin_count: usize,
    pub histogram_extent_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerceptionConfig {
    Perfect,
    PointCloud { noise_sigma_m: f64, dropout: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeBiasConfig {
    pub t_start_s: f64,
    pub duration_s: f64,
    pub bias_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub f_high_hz: f64,
    pub f_low_hz: f64,
    pub tau_v_s: f64,
    pub tau_yaw_s: f64,
    pub tau_hold_s: f64,
    pub v_max_mps: f64,
    pub vz_max_mps: f64,
    pub yaw_rate_max_dps: f64,
    pub perception: PerceptionConfig,
    #[serde(default)]
    pub range_bias: Vec<RangeBiasConfig>,
    #[serde(default)]
    pub disturbance_mps: [f64; 3],
    pub start_position_m: [f64; 3],
    pub start_yaw_deg: f64,
    #[serde(default)]
    pub duration_s: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub pitch_limit_deg: f64,
    pub roll_limit_deg: f64,
    pub step_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageConfig {
    pub r_range_m: [f64; 2],
    pub dh_range_m: [f64; 2],
    pub grid_step_m: f64,
    pub metric_floor: f64,
    pub attitude_envelope: EnvelopeConfig,
}

impl Default for CoverageConfig {
    fn default() -> Self {
        Self {
            r_range_m: [0.0, 4.0],
            dh_range_m: [-3.0, 3.0],
            grid_step_m: 0.1,
            metric_floor: crate::geometry::DEFAULT_METRIC_FLOOR,
            attitude_envelope: EnvelopeConfig {
                pitch_limit_deg: 20.0,
                roll_limit_deg: 0.0,
                step_deg: 5.0,
            },
        }
    }
}

/// Vehicle data kept for the log metadata only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformConfig {
    #[serde(default)]
    pub mass_kg: Option<f64>,
}

fn v3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

impl SceneConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let scene: Self = read_json(path.as_ref())?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let scene: Self = serde_json::from_str(text)?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn infrastructure(&self) -> InfrastructureModel {
        let c = &self.infrastructure;
        let pole = v3(c.pole_position_m);
        let z = &c.protection_zone;
        InfrastructureModel {
            pole_position: pole,
            pole_height: c.pole_height_m,
            pole_radius: c.pole_radius_m,
            crossarm_attach: c
                .crossarm_attach_m
                .map(v3)
                .unwrap_or_else(|| pole + Vector3::new(0.0, 0.0, c.pole_height_m)),
            crossarm_radius: c.crossarm_radius_m,
            crossarm_yaw: c.crossarm_yaw_deg.map(f64::to_radians),
            wire_count: c.wire_count,
            detection_disc_radius: c.detection_disc_radius_m,
            protection_zone: ProtectionZone {
                cylinder_radius: z.cylinder_radius_m,
                slab_height: z.slab_height_m,
                slab_width: z.slab_width_m,
                slab_yaw: z.slab_yaw_deg.to_radians(),
            },
        }
    }

    pub fn sensor(&self) -> SensorModel {
        SensorModel {
            cameras: self
                .sensor
                .cameras
                .iter()
                .map(|c| CameraSpec {
                    yaw_offset: c.yaw_offset_deg.to_radians(),
                    pitch_offset: c.pitch_offset_deg.to_radians(),
                    h_half_angle: c.h_half_angle_deg.to_radians(),
                    v_half_angle: c.v_half_angle_deg.to_radians(),
                    range: c.range_m,
                })
                .collect(),
        }
    }

    pub fn control(&self) -> ControlParams {
        let c = &self.control;
        let s = &self.sim;
        ControlParams {
            kp: c.kp_per_s,
            kd: c.kd,
            yaw_deadband: c.yaw_deadband_deg.to_radians(),
            deadband_mode: c.deadband_mode,
            rz: self.infrastructure.protection_zone.cylinder_radius_m,
            eta_margin: c.eta_margin_deg.to_radians(),
            threat_distance: c.threat_distance_m,
            hysteresis: c.hysteresis_m,
            v_gain: c.v_gain,
            min_egress_speed: c.min_egress_speed_mps,
            dt_high: 1.0 / s.f_high_hz,
            v_max: s.v_max_mps,
            yaw_rate_max: s.yaw_rate_max_dps.to_radians(),
        }
    }

    pub fn filter(&self) -> FilterParams {
        let f = &self.filter;
        FilterParams {
            voxel_size: f.voxel_size_m,
            outlier_radius: f.outlier_radius_m,
            min_neighbors: f.min_neighbors,
            histogram_bin: f.histogram_bin_m,
            min_bin_count: f.min_bin_count,
            histogram_extent: f.histogram_extent_m,
        }
    }

    pub fn sim(&self) -> SimConfig {
        let s = &self.sim;
        SimConfig {
            f_high: s.f_high_hz,
            f_low: s.f_low_hz,
            plant: PlantParams {
                tau_v: s.tau_v_s,
                tau_yaw: s.tau_yaw_s,
                tau_hold: s.tau_hold_s,
            },
            v_max: s.v_max_mps,
            vz_max: s.vz_max_mps,
            yaw_rate_max: s.yaw_rate_max_dps.to_radians(),
            perception: match s.perception {
                PerceptionConfig::Perfect => PerceptionMode::Perfect,
                PerceptionConfig::PointCloud {
                    noise_sigma_m,
                    dropout,
                } => PerceptionMode::PointCloud {
                    noise_sigma: noise_sigma_m,
                    dropout,
                },
            },
            range_bias: s
                .range_bias
                .iter()
                .map(|b| RangeBias {
                    t_start: b.t_start_s,
                    duration: b.duration_s,
                    bias: b.bias_m,
                })
                .collect(),
            disturbance: v3(s.disturbance_mps),
            start_position: v3(s.start_position_m),
            start_yaw: s.start_yaw_deg.to_radians(),
            duration: s.duration_s,
            seed: s.seed,
        }
    }

    pub fn r_range(&self) -> Interval {
        Interval::new(self.coverage.r_range_m[0], self.coverage.r_range_m[1])
    }

    pub fn dh_range(&self) -> Interval {
        Interval::new(self.coverage.dh_range_m[0], self.coverage.dh_range_m[1])
    }

    pub fn envelope(&self) -> AttitudeEnvelope {
        let e = &self.coverage.attitude_envelope;
        AttitudeEnvelope {
            roll_limit: e.roll_limit_deg.to_radians(),
            pitch_limit: e.pitch_limit_deg.to_radians(),
            step: e.step_deg.to_radians(),
        }
    }

    /// Checks every section plus the cross-field rules.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |e: &dyn std::fmt::Display| ScenarioError::Invalid(e.to_string());
        let infra = self.infrastructure();
        infra.validate().map_err(|e| invalid(&e))?;
        let sensor = self.sensor();
        sensor.validate().map_err(|e| invalid(&e))?;
        self.control().validate().map_err(|e| invalid(&e))?;
        self.filter().validate().map_err(|e| invalid(&e))?;
        self.sim().validate().map_err(|e| invalid(&e))?;
        let rz = infra.protection_zone.cylinder_radius;
        if rz <= infra.pole_radius {
            return Err(ScenarioError::Invalid(format!(
                "zone radius {rz} m must exceed the pole radius {} m",
                infra.pole_radius
            )));
        }
        if sensor.max_range() < rz {
            return Err(ScenarioError::Invalid(format!(
                "sensor range {} m is shorter than the zone radius {rz} m",
                sensor.max_range()
            )));
        }
        let c = &self.coverage;
        if !(c.grid_step_m > 0.0)
            || !(c.r_range_m[0] <= c.r_range_m[1])
            || !(c.dh_range_m[0] <= c.dh_range_m[1])
            || !(c.metric_floor > 0.0 && c.metric_floor < 1.0)
            || !(c.attitude_envelope.step_deg > 0.0)
        {
            return Err(ScenarioError::Invalid("bad coverage section".into()));
        }
        Ok(())
    }
}
