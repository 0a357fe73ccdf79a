use std::f64::consts::FRAC_PI_2;

use super::{ControlOutput, ControlParams, DeadbandMode, OperatorInput, SystemState};
use crate::angle::{angle_diff, wrap_pi};
use crate::perception::Detection;

/// PD yaw-rate toward the pole, or the operator's yaw rate inside the deadband.
pub fn yaw_command(psi_now: f64, psi_prev: f64, requested_uw: f64, params: &ControlParams) -> f64 {
    let delta = angle_diff(psi_now, psi_prev);
    let test = match params.deadband_mode {
        DeadbandMode::AsWritten => delta.abs(),
        DeadbandMode::PointingError => psi_now.abs(),
    };
    if test > params.yaw_deadband {
        params.kp * psi_now + params.kd * delta / params.dt_high
    } else {
        requested_uw
    }
}

/// Half-angle of the cone from the platform tangent to the zone cylinder.
pub fn threat_cone(range: f64, params: &ControlParams) -> f64 {
    let eta = if range <= params.rz {
        FRAC_PI_2
    } else {
        (params.rz / range).min(1.0).asin()
    };
    eta + params.eta_margin
}

/// Angle between the lateral request and the direction to the pole; `None`
/// when there is no lateral request.
pub fn psi_v(requested: &OperatorInput, bearing: f64) -> Option<f64> {
    if requested.ux == 0.0 && requested.uy == 0.0 {
        return None;
    }
    Some(wrap_pi(requested.uy.atan2(requested.ux) - bearing))
}

pub fn attenuation_factor(range: f64, params: &ControlParams) -> f64 {
    (1.0 - (-(range - params.rz).abs()).exp()) * params.v_gain
}

/// True when the request points into the threat cone. A zero lateral request
/// is never inward.
pub fn is_inward(range: f64, psi_v: Option<f64>, params: &ControlParams) -> bool {
    psi_v.is_some_and(|a| a.abs() <= threat_cone(range, params))
}

/// Scales inward requests down as the boundary approaches. Returns the xy
/// command and whether it was modified.
pub fn attenuate(
    requested: &OperatorInput,
    range: f64,
    psi_v: f64,
    params: &ControlParams,
) -> (f64, f64, bool) {
    if psi_v.abs() <= threat_cone(range, params) {
        let f = attenuation_factor(range, params);
        (requested.ux * f, requested.uy * f, true)
    } else {
        (requested.ux, requested.uy, false)
    }
}

/// Inside the boundary: reverses and scales inward requests.
pub fn repel(
    requested: &OperatorInput,
    range: f64,
    psi_v: f64,
    params: &ControlParams,
) -> (f64, f64, bool) {
    if psi_v.abs() <= threat_cone(range, params) {
        let f = attenuation_factor(range, params);
        (-requested.ux * f, -requested.uy * f, true)
    } else {
        (requested.ux, requested.uy, false)
    }
}

fn clamp(v: f64, limit: f64) -> f64 {
    v.clamp(-limit, limit)
}

/// Shapes the operator request for the (already stepped) state.
///
/// `psi_prev` is the pointing error at the previous high-level tick; pass
/// `psi_now` when there is none.
pub fn assist(
    state: SystemState,
    detection: &Detection,
    requested: &OperatorInput,
    psi_now: f64,
    psi_prev: f64,
    params: &ControlParams,
) -> ControlOutput {
    let mut out = ControlOutput {
        ux: requested.ux,
        uy: requested.uy,
        uz: requested.uz,
        uw: requested.uw,
        state,
        attenuation_applied: false,
        reversed: false,
    };
    let range = detection.range;
    // without a lateral request there is nothing to shape
    let pv = psi_v(requested, detection.bearing).unwrap_or(std::f64::consts::PI);
    match state {
        SystemState::Manual | SystemState::Inspect1 => {}
        SystemState::Inspect2 => {
            out.uw = yaw_command(psi_now, psi_prev, requested.uw, params);
        }
        SystemState::Inspect3 => {
            let (ux, uy, applied) = attenuate(requested, range, pv, params);
            out.ux = ux;
            out.uy = uy;
            out.attenuation_applied = applied;
            out.uw = yaw_command(psi_now, psi_prev, requested.uw, params);
        }
        SystemState::Inspect4 => {
            let (mut ux, mut uy, applied) = repel(requested, range, pv, params);
            if params.min_egress_speed > 0.0 {
                let (s, c) = detection.bearing.sin_cos();
                // outward is away from the pole
                let outward = -(ux * c + uy * s);
                if outward < params.min_egress_speed {
                    let push = params.min_egress_speed - outward;
                    ux -= push * c;
                    uy -= push * s;
                }
            }
            out.ux = ux;
            out.uy = uy;
            out.attenuation_applied = applied;
            out.reversed = applied;
            out.uw = yaw_command(psi_now, psi_prev, requested.uw, params);
        }
    }
    // horizontal speed is limited as a vector so diagonal requests cannot
    // exceed v_max
    let speed = out.ux.hypot(out.uy);
    if speed > params.v_max {
        let k = params.v_max / speed;
        out.ux *= k;
        out.uy *= k;
    }
    out.uw = clamp(out.uw, params.yaw_rate_max);
    out
}
