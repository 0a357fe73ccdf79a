use serde::{Deserialize, Serialize};
use std::io::Write;

use super::{OperatorInput, SystemState};

/// One high-level tick of the assisted controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlFrame {
    pub t: f64,
    pub state: SystemState,
    pub requested: OperatorInput,
    pub applied: OperatorInput,
    pub range: Option<f64>,
    pub psi: Option<f64>,
    pub psi_v: Option<f64>,
}

pub(crate) fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_frames_csv<W: Write>(frames: &[ControlFrame], w: W) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(w);
    writeln!(
        w,
        "t,state,ux_req,uy_req,uz_req,uw_req,ux_out,uy_out,uz_out,uw_out,range,psi,psi_v"
    )?;
    for f in frames {
        let (r, a) = (f.requested, f.applied);
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            f.t,
            f.state,
            r.ux,
            r.uy,
            r.uz,
            r.uw,
            a.ux,
            a.uy,
            a.uz,
            a.uw,
            opt(f.range),
            opt(f.psi),
            opt(f.psi_v)
        )?;
    }
    w.flush()
}
