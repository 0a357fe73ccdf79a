use std::f64::consts::{PI, TAU};

/// Wraps an angle into (-pi, pi].
pub fn wrap_pi(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

/// Shortest signed arc from `from` to `to`.
pub fn angle_diff(to: f64, from: f64) -> f64 {
    wrap_pi(to - from)
}
