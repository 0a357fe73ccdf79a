use nalgebra::Point3;

use super::log::{FlightLog, LogMetadata};
use super::plant::{step_low, PlatformState};
use super::FlightRecord;
use super::{OperatorTrace, PerceptionMode, SimConfig, SimError};
use crate::angle::wrap_pi;
use crate::control::{
    AssistController, ControlFrame, ControlParams, ModeSwitch, OperatorInput, SystemState,
};
use crate::geometry::{InfrastructureModel, PlatformPose, SensorModel};
use crate::perception::{camera_extrinsic, run_pipeline, synth_cloud, Detection, FilterParams};

/// Detection for the platform state at tick `tick`, including any injected
/// range bias.
pub fn perceive(
    infra: &InfrastructureModel,
    sensor: &SensorModel,
    filter: &FilterParams,
    cfg: &SimConfig,
    state: &PlatformState,
    tick: u64,
) -> Result<Detection, SimError> {
    let t = state.time;
    let p = Point3::from(state.position);
    let mut det = match cfg.perception {
        PerceptionMode::Perfect => {
            let range = infra.horizontal_range(&p);
            if range <= sensor.max_range() {
                let rel = infra.pole_xy() - p.xy();
                Detection {
                    valid: true,
                    range,
                    bearing: wrap_pi(rel.y.atan2(rel.x) - state.yaw),
                    delta_h: Some(infra.delta_h(&p)),
                    timestamp: t,
                }
            } else {
                Detection::invalid(t)
            }
        }
        PerceptionMode::PointCloud {
            noise_sigma,
            dropout,
        } => {
            let pose = PlatformPose::level(p, state.yaw);
            let seed = cfg
                .seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(tick);
            let clouds = synth_cloud(infra, sensor, &pose, noise_sigma, dropout, seed);
            let ext: Vec<_> = sensor.cameras.iter().map(camera_extrinsic).collect();
            run_pipeline(&clouds, &ext, filter, t)?
        }
    };
    if det.valid {
        det.range = (det.range + cfg.bias_at(t)).max(0.0);
    }
    Ok(det)
}


/// Closed loop stepped one high-level tick at a time.
#[derive(Debug, Clone)]
pub struct Episode {
    infra: InfrastructureModel,
    sensor: SensorModel,
    filter: FilterParams,
    cfg: SimConfig,
    params: ControlParams,
    controller: AssistController,
    state: PlatformState,
    tick: u64,
    records: Vec<FlightRecord>,
}

impl Episode {
    pub fn new(
        infra: &InfrastructureModel,
        sensor: &SensorModel,
        cfg: &SimConfig,
        params: &ControlParams,
        filter: &FilterParams,
    ) -> Result<Self, SimError> {
        cfg.validate()?;
        params.validate()?;
        filter.validate()?;
        let dt_high = 1.0 / cfg.f_high;
        if (params.dt_high - dt_high).abs() > 1e-9 {
            return Err(SimError::Config(format!(
                "control dt_high {} does not match 1 / f_high = {}",
                params.dt_high, dt_high
            )));
        }
        Ok(Self {
            infra: infra.clone(),
            sensor: sensor.clone(),
            filter: *filter,
            cfg: cfg.clone(),
            params: *params,
            controller: AssistController::new(*params),
            state: PlatformState::at_rest(cfg.start_position, cfg.start_yaw),
            tick: 0,
            records: Vec::new(),
        })
    }

    pub fn time(&self) -> f64 {
        self.tick as f64 / self.cfg.f_high
    }

    pub fn platform(&self) -> &PlatformState {
        &self.state
    }

    pub fn system_state(&self) -> SystemState {
        self.controller.state()
    }

    pub fn records(&self) -> &[FlightRecord] {
        &self.records
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn params(&self) -> &ControlParams {
        &self.params
    }

    pub fn infrastructure(&self) -> &InfrastructureModel {
        &self.infra
    }

    /// Runs one high-level tick with `requested` held for its duration and
    /// returns the record logged for it.
    pub fn step(
        &mut self,
        requested: OperatorInput,
        switch: ModeSwitch,
    ) -> Result<&FlightRecord, SimError> {
        let cfg = &self.cfg;
        let infra = &self.infra;
        let t = self.time();
        self.state.time = t;
        let detection = perceive(infra, &self.sensor, &self.filter, cfg, &self.state, self.tick)?;
        let requested = cfg.clamp_stick(requested);
        let tick = self.controller.tick(&detection, &requested, switch);
        let out = tick.output;

        let start = self.state;
        let true_range = infra.horizontal_range(&Point3::from(start.position));
        let mut min_range = true_range;
        let ratio = cfg.ratio();
        let dt_low = 1.0 / cfg.f_low;
        let mut state = start;
        for _ in 0..ratio {
            state = step_low(&state, &out, dt_low, &cfg.plant);
            state.position += cfg.disturbance * dt_low;
            min_range = min_range.min(infra.horizontal_range(&Point3::from(state.position)));
        }
        self.state = state;
        self.tick += 1;

        self.records.push(FlightRecord {
            frame: ControlFrame {
                t,
                state: out.state,
                requested,
                applied: OperatorInput::new(out.ux, out.uy, out.uz, out.uw),
                range: detection.valid.then_some(detection.range),
                psi: tick.psi,
                psi_v: tick.psi_v,
            },
            platform: start,
            detection,
            true_range,
            min_range,
            attenuation_applied: out.attenuation_applied,
            reversed: out.reversed,
            low_steps: ratio,
        });
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn into_log(self) -> FlightLog {
        FlightLog {
            records: self.records,
            metadata: LogMetadata {
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: self.cfg.seed,
                infrastructure: self.infra,
                sensor: self.sensor,
                sim: self.cfg,
                control: self.params,
                filter: self.filter,
            },
        }
    }
}

/// Runs one closed-loop episode. Each high-level tick perceives, steps the
/// controller and then runs `f_low / f_high` plant steps with the output held.
pub fn run_episode(
    infra: &InfrastructureModel,
    sensor: &SensorModel,
    trace: &OperatorTrace,
    cfg: &SimConfig,
    params: &ControlParams,
    filter: &FilterParams,
) -> Result<FlightLog, SimError> {
    trace.validate()?;
    let mut episode = Episode::new(infra, sensor, cfg, params, filter)?;
    let dt_high = 1.0 / cfg.f_high;
    let duration = cfg.duration.unwrap_or_else(|| trace.end_time());
    let ticks = (duration * cfg.f_high - 1e-9).ceil().max(0.0) as u64;
    for _ in 0..ticks {
        let t = episode.time();
        episode.step(trace.input_at(t), trace.switch_in(t, t + dt_high))?;
    }
    Ok(episode.into_log())
}
