use serde::{Deserialize, Serialize};

use super::{FlightLog, SimError};

/// Ticks dropped at the start of a lateral segment while yaw settles.
const SETTLE_TICKS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitReport {
    pub start_tick: usize,
    pub ticks: usize,
    pub max_abs_psi: f64,
    pub mean_abs_psi: f64,
    pub mean_range: f64,
    pub range_std: f64,
    /// Largest |range - mean| / mean over the segment.
    pub max_range_deviation: f64,
    pub psi_limit: f64,
    pub detected: bool,
}

/// Checks for orbit-like motion over the longest run of lateral-only input
/// (ux = 0, uy != 0) with a valid detection.
pub fn orbit_check(log: &FlightLog) -> Result<OrbitReport, SimError> {
    let lateral = |i: usize| {
        let r = &log.records[i];
        let q = r.frame.requested;
        q.ux == 0.0 && q.uy != 0.0 && r.detection.valid
    };
    let (mut best, mut run_start) = ((0, 0), None);
    for i in 0..=log.records.len() {
        if i < log.records.len() && lateral(i) {
            run_start.get_or_insert(i);
        } else if let Some(s) = run_start.take() {
            if i - s > best.1 - best.0 {
                best = (s, i);
            }
        }
    }
    let (start, end) = (best.0 + SETTLE_TICKS, best.1);
    if end <= start + 1 {
        return Err(SimError::InsufficientSegment);
    }
    let seg = &log.records[start..end];
    let n = seg.len() as f64;
    let psis: Vec<f64> = seg.iter().map(|r| r.detection.bearing.abs()).collect();
    let ranges: Vec<f64> = seg.iter().map(|r| r.true_range).collect();
    let mean_range = ranges.iter().sum::<f64>() / n;
    let var = ranges.iter().map(|r| (r - mean_range).powi(2)).sum::<f64>() / n;
    let max_dev = ranges
        .iter()
        .map(|r| (r - mean_range).abs() / mean_range)
        .fold(0.0, f64::max);
    let max_psi = psis.iter().copied().fold(0.0, f64::max);
    let psi_limit = log.metadata.control.yaw_deadband + 5f64.to_radians();
    Ok(OrbitReport {
        start_tick: start,
        ticks: seg.len(),
        max_abs_psi: max_psi,
        mean_abs_psi: psis.iter().sum::<f64>() / n,
        mean_range,
        range_std: var.sqrt(),
        max_range_deviation: max_dev,
        psi_limit,
        detected: max_psi < psi_limit && max_dev <= 0.15,
    })
}
