use super::coverage::CoverageGrid;
use super::types::{InfrastructureModel, ProtectionZone};
use super::GeometryError;

/// Calibrated against the reference scene swept over the +/-20 deg pitch
/// envelope: cells at or above this floor span 0.6 <= r <= 3.5, |dh| <= 2.
pub const DEFAULT_METRIC_FLOOR: f64 = 0.95;

/// Smallest T-zone that swallows every blind cell on the approach side.
///
/// For each height row the detectable cells start at some range r*; cells
/// nearer the pole than r* are blind, since the platform would lose sight of
/// the pole while flying through them. Rows with no detectable cell carry no
/// approach and are ignored.
///
/// The sweep axis is treated as running across the wires, so the slab only
/// covers cells with r <= d_z / 2. Blind cells there raise h_z; blind cells
/// further out raise r_z (and h_z when they sit above the slab top, because
/// the cylinder ends there). Lower bounds: r_z just outside the pole (one grid
/// step), d_z spans the crossarm, h_z spans the pole diameter.
pub fn recommend_zone(
    sweep: &CoverageGrid,
    infra: &InfrastructureModel,
    metric_floor: f64,
) -> Result<ProtectionZone, GeometryError> {
    if sweep.cells.is_empty() {
        return Err(GeometryError::InvalidSweep("empty sweep".into()));
    }
    if !(metric_floor > 0.0 && metric_floor < 1.0) {
        return Err(GeometryError::InvalidSweep(format!(
            "metric floor {metric_floor} outside (0, 1)"
        )));
    }
    let step = grid_step(&sweep.r_values).unwrap_or(0.1);

    let mut zone = ProtectionZone {
        cylinder_radius: infra.pole_radius + step,
        slab_height: 2.0 * infra.pole_radius,
        slab_width: 2.0 * infra.crossarm_radius,
        slab_yaw: infra.protection_zone.slab_yaw,
    };
    let half_width = 0.5 * zone.slab_width;

    let mut any_detectable = false;
    for row in sweep.rows() {
        let Some(r_star) = row
            .iter()
            .filter(|c| c.pole_metric >= metric_floor)
            .map(|c| c.r)
            .reduce(f64::min)
        else {
            continue;
        };
        any_detectable = true;
        for cell in row.iter().filter(|c| c.r < r_star) {
            if cell.r <= half_width {
                zone.slab_height = zone.slab_height.max(2.0 * cell.dh.abs());
            } else {
                zone.cylinder_radius = zone.cylinder_radius.max(cell.r);
                if cell.dh > 0.0 {
                    zone.slab_height = zone.slab_height.max(2.0 * cell.dh);
                }
            }
        }
    }
    if !any_detectable {
        return Err(GeometryError::NoSafeZone(metric_floor));
    }
    Ok(zone)
}

fn grid_step(values: &[f64]) -> Option<f64> {
    values.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
}
