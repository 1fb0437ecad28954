//! CSV export with fixed 17-significant-digit number formatting.

use std::io::Write;

use crate::analysis::RegionMap;
use crate::error::{Error, Result};
use crate::steady::Trajectory;

pub const REGION_HEADER: [&str; 13] = [
    "x",
    "y",
    "entangled",
    "steer_ab",
    "steer_ba",
    "bell",
    "margin_ent",
    "margin_ab",
    "margin_ba",
    "margin_bell",
    "current_b",
    "sigma",
    "positivity_ok",
];

pub const TRAJECTORY_HEADER: [&str; 7] = ["t", "rho_gg", "rho_e1e1", "rho_e2e2", "rho_e3e3", "re_coh", "im_coh"];

/// Formats like C's `%.17g`.
pub fn fmt_g17(v: f64) -> String {
    const P: i32 = 17;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::InvalidState(format!("csv output failed: {e}"))
}

/// One row per cell, row-major in `(y, x)`.
pub fn write_region_csv<W: Write>(map: &RegionMap, w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(REGION_HEADER).map_err(io)?;
    for c in &map.cells {
        let b = |f: bool| f.to_string();
        out.write_record([
            fmt_g17(c.x),
            fmt_g17(c.y),
            b(c.entangled),
            b(c.steer_ab),
            b(c.steer_ba),
            b(c.bell),
            fmt_g17(c.margin_ent),
            fmt_g17(c.margin_ab),
            fmt_g17(c.margin_ba),
            fmt_g17(c.margin_bell),
            fmt_g17(c.current_b),
            fmt_g17(c.sigma),
            b(c.positivity_ok),
        ])
        .map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Energy-basis populations and the retained coherence per time step.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, w: W) -> Result<()> {
    let mut out = writer(w);
    out.write_record(TRAJECTORY_HEADER).map_err(io)?;
    for pt in &traj.points {
        let pops = pt.state.populations();
        let coh = pt.state.coherence();
        let mut row = vec![fmt_g17(pt.t)];
        row.extend(pops.iter().map(|&p| fmt_g17(p)));
        row.push(fmt_g17(coh.re));
        row.push(fmt_g17(coh.im));
        out.write_record(&row).map_err(io)?;
    }
    out.flush().map_err(io)
}
