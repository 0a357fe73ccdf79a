use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;

use super::plant::PlatformState;
use super::SimConfig;
use crate::control::{ControlFrame, ControlParams, SystemState};
use crate::geometry::{InfrastructureModel, SensorModel};
use crate::perception::{Detection, FilterParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightRecord {
    pub frame: ControlFrame,
    /// Platform state at the tick, before the low-level steps.
    pub platform: PlatformState,
    pub detection: Detection,
    /// Ground-truth horizontal range at the tick.
    pub true_range: f64,
    /// Smallest true range from this tick until the next one.
    pub min_range: f64,
    pub attenuation_applied: bool,
    pub reversed: bool,
    pub low_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogMetadata {
    pub version: String,
    pub seed: u64,
    pub infrastructure: InfrastructureModel,
    pub sensor: SensorModel,
    pub sim: SimConfig,
    pub control: ControlParams,
    pub filter: FilterParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightLog {
    pub records: Vec<FlightRecord>,
    pub metadata: LogMetadata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSummary {
    pub ticks: usize,
    pub min_range: f64,
    /// Deepest allowed range: r_z minus one tick of travel at v_max.
    pub allowance_floor: f64,
    /// Ticks whose true range dipped below the allowance floor.
    pub breaches: usize,
    pub state_histogram: BTreeMap<String, usize>,
    pub state4_dwell: f64,
}

pub const CSV_HEADER: &str =
    "t,state,ux_req,uy_req,uz_req,uw_req,ux_out,uy_out,uz_out,uw_out,x,y,z,yaw,range,valid";

impl FlightLog {
    pub fn frames(&self) -> impl Iterator<Item = &ControlFrame> {
        self.records.iter().map(|r| &r.frame)
    }

    pub fn states(&self) -> impl Iterator<Item = SystemState> + '_ {
        self.records.iter().map(|r| r.frame.state)
    }

    pub fn min_range(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.min_range)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn allowance_floor(&self) -> f64 {
        let m = &self.metadata;
        m.control.rz - m.sim.v_max / m.sim.f_high
    }

    pub fn summary(&self) -> LogSummary {
        let floor = self.allowance_floor();
        let mut hist: BTreeMap<String, usize> = SystemState::ALL
            .iter()
            .map(|s| (s.name().to_string(), 0))
            .collect();
        for s in self.states() {
            *hist.entry(s.name().to_string()).or_default() += 1;
        }
        let dt = 1.0 / self.metadata.sim.f_high;
        LogSummary {
            ticks: self.records.len(),
            min_range: self.min_range(),
            allowance_floor: floor,
            breaches: self.records.iter().filter(|r| r.min_range < floor).count(),
            state4_dwell: hist[SystemState::Inspect4.name()] as f64 * dt,
            state_histogram: hist,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(w);
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.records {
            let f = &r.frame;
            let (q, a, p) = (f.requested, f.applied, &r.platform);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                f.t,
                f.state,
                q.ux,
                q.uy,
                q.uz,
                q.uw,
                a.ux,
                a.uy,
                a.uz,
                a.uw,
                p.position.x,
                p.position.y,
                p.position.z,
                p.yaw,
                f.range.map(|v| v.to_string()).unwrap_or_default(),
                r.detection.valid
            )?;
        }
        w.flush()
    }

    pub fn write_metadata<W: Write>(&self, w: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(w, &self.metadata)
    }
}
