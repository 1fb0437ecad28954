use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::point::{evaluate, Axis, OperatingPoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub axis: Axis,
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl AxisRange {
    pub fn new(axis: Axis, min: f64, max: f64, points: usize) -> Self {
        Self { axis, min, max, points }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|k| {
                if k + 1 == n {
                    self.max
                } else {
                    self.min + (self.max - self.min) * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.points < 2 {
            return Err(Error::InvalidSweep(format!("{name} axis needs at least 2 points")));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::InvalidSweep(format!("{name} axis range [{}, {}] is empty", self.min, self.max)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: OperatingPoint,
    pub x: AxisRange,
    pub y: AxisRange,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.x.validate("x")?;
        self.y.validate("y")?;
        if self.x.axis == self.y.axis {
            return Err(Error::InvalidSweep("x and y must drive different quantities".into()));
        }
        self.base.params.validate()?;
        Ok(())
    }

    pub fn point(&self, x: f64, y: f64) -> OperatingPoint {
        self.base.with(self.x.axis, x).with(self.y.axis, y)
    }
}

/// One grid cell. Masked cells (`positivity_ok == false`) keep whatever the
/// classification produced, or all-false flags with NaN margins if it failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub x: f64,
    pub y: f64,
    pub entangled: bool,
    pub steer_ab: bool,
    pub steer_ba: bool,
    pub bell: bool,
    pub margin_ent: f64,
    pub margin_ab: f64,
    pub margin_ba: f64,
    pub margin_bell: f64,
    pub current_b: f64,
    pub sigma: f64,
    pub positivity_ok: bool,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub config: SweepConfig,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major in `(y, x)`.
    pub cells: Vec<CellResult>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionCounts {
    pub entangled: usize,
    pub two_way: usize,
    pub only_a_to_b: usize,
    pub only_b_to_a: usize,
    pub bell: usize,
    pub masked: usize,
}

impl RegionMap {
    pub fn cell(&self, ix: usize, iy: usize) -> &CellResult {
        &self.cells[iy * self.xs.len() + ix]
    }

    pub fn masked_count(&self) -> usize {
        self.cells.iter().filter(|c| !c.positivity_ok).count()
    }

    /// Region sizes over unmasked cells.
    pub fn counts(&self) -> RegionCounts {
        let mut out = RegionCounts::default();
        for c in &self.cells {
            if !c.positivity_ok {
                out.masked += 1;
                continue;
            }
            out.entangled += c.entangled as usize;
            out.bell += c.bell as usize;
            match (c.steer_ab, c.steer_ba) {
                (true, true) => out.two_way += 1,
                (true, false) => out.only_a_to_b += 1,
                (false, true) => out.only_b_to_a += 1,
                _ => {}
            }
        }
        out
    }
}

fn evaluate_cell(op: &OperatingPoint, x: f64, y: f64) -> Result<CellResult> {
    let wrap = |e: Error| Error::Cell { x, y, message: e.to_string() };
    match evaluate(op) {
        Ok(r) => Ok(CellResult {
            x,
            y,
            entangled: r.correlations.entangled.flag,
            steer_ab: r.correlations.steer_a_to_b.flag,
            steer_ba: r.correlations.steer_b_to_a.flag,
            bell: r.correlations.bell.flag,
            margin_ent: r.correlations.entangled.margin,
            margin_ab: r.correlations.steer_a_to_b.margin,
            margin_ba: r.correlations.steer_b_to_a.margin,
            margin_bell: r.correlations.bell.margin,
            current_b: r.transport.current_b,
            sigma: r.transport.sigma,
            positivity_ok: r.steady.positivity_ok,
            min_eigenvalue: r.steady.min_eigenvalue,
        }),
        Err(e @ (Error::HierarchyViolation(_) | Error::PathDisagreement(_))) => {
            // Tolerated only where the steady state is unphysical anyway.
            let g = op.generator().map_err(wrap)?;
            let steady = crate::steady::steady_state(&g).map_err(wrap)?;
            if steady.positivity_ok {
                return Err(wrap(e));
            }
            let t = crate::transport::currents(&g, &steady).map_err(wrap)?;
            Ok(CellResult {
                x,
                y,
                entangled: false,
                steer_ab: false,
                steer_ba: false,
                bell: false,
                margin_ent: f64::NAN,
                margin_ab: f64::NAN,
                margin_ba: f64::NAN,
                margin_bell: f64::NAN,
                current_b: t.current_b,
                sigma: t.sigma,
                positivity_ok: false,
                min_eigenvalue: steady.min_eigenvalue,
            })
        }
        Err(e) => Err(wrap(e)),
    }
}

/// Evaluates every grid cell on the global rayon pool.
pub fn sweep2d(c: &SweepConfig) -> Result<RegionMap> {
    c.validate()?;
    let xs = c.x.values();
    let ys = c.y.values();
    let nx = xs.len();
    let cells = (0..xs.len() * ys.len())
        .into_par_iter()
        .map(|k| {
            let (x, y) = (xs[k % nx], ys[k / nx]);
            evaluate_cell(&c.point(x, y), x, y)
        })
        .collect::<Result<Vec<_>>>()?;
    let map = RegionMap { config: *c, xs, ys, cells };
    let masked = map.masked_count();
    if masked > 0 {
        log::warn!("{masked} cells violate positivity and are masked");
    }
    Ok(map)
}

/// [`sweep2d`] on a dedicated pool of `jobs` workers. Output does not depend on `jobs`.
pub fn sweep2d_with_jobs(c: &SweepConfig, jobs: usize) -> Result<RegionMap> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidSweep(format!("cannot start worker pool: {e}")))?;
    pool.install(|| sweep2d(c))
}
