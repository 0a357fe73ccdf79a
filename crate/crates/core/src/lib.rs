//! Coverage analysis, pole detection and assisted control for multirotor
//! inspection of pole, crossarm and wire infrastructure.

pub mod angle;
pub mod geometry;
pub mod control;
pub mod perception;
pub mod scenario;
pub mod simulator;
