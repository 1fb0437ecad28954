//! Region-map post-processing: nesting checks and boundary extraction.

use serde::{Deserialize, Serialize};

use super::point::Axis;
use super::sweep::{CellResult, RegionMap};
use super::threshold::{criterion_margin, Criterion};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyViolation {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    pub reason: String,
}

/// Cells whose flags break Bell ⊂ two-way steering, steering ⊂ entanglement.
/// Masked cells are skipped.
pub fn hierarchy_check(map: &RegionMap) -> Vec<HierarchyViolation> {
    let mut out = Vec::new();
    for (index, c) in map.cells.iter().enumerate() {
        if !c.positivity_ok {
            continue;
        }
        let mut push = |reason: &str| out.push(HierarchyViolation { index, x: c.x, y: c.y, reason: reason.into() });
        if c.bell && !(c.steer_ab && c.steer_ba) {
            push("bell nonlocal but not two-way steerable");
        }
        if (c.steer_ab || c.steer_ba) && !c.entangled {
            push("steerable but not entangled");
        }
    }
    out
}

pub fn cell_margin(c: &CellResult, criterion: Criterion) -> f64 {
    match criterion {
        Criterion::AtoB => c.margin_ab,
        Criterion::BtoA => c.margin_ba,
        Criterion::TwoWay => c.margin_ab.min(c.margin_ba),
        Criterion::Entanglement => c.margin_ent,
        Criterion::Bell => c.margin_bell,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub row: usize,
    pub y: f64,
    pub x: f64,
    /// True when the margin is positive on the larger-x side.
    pub rising: bool,
}

/// Sign changes of the margin between horizontal neighbours. With `refine`
/// each crossing is bisected in x down to 1e-4 of the axis range, otherwise
/// it is linearly interpolated.
pub fn boundary_crossings(map: &RegionMap, criterion: Criterion, refine: bool) -> Result<Vec<Crossing>> {
    let nx = map.xs.len();
    let tol = 1e-4 * (map.config.x.max - map.config.x.min);
    let mut out = Vec::new();
    for (row, &y) in map.ys.iter().enumerate() {
        for ix in 0..nx - 1 {
            let (l, r) = (map.cell(ix, row), map.cell(ix + 1, row));
            if !(l.positivity_ok && r.positivity_ok) {
                continue;
            }
            let (ml, mr) = (cell_margin(l, criterion), cell_margin(r, criterion));
            if !(ml.is_finite() && mr.is_finite()) || (ml > 0.0) == (mr > 0.0) {
                continue;
            }
            let x = if refine {
                let (mut a, mut b) = (l.x, r.x);
                let left_positive = ml > 0.0;
                while b - a > tol {
                    let mid = 0.5 * (a + b);
                    let m = criterion_margin(&map.config.point(mid, y), criterion)?;
                    if (m > 0.0) == left_positive {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                0.5 * (a + b)
            } else {
                l.x + (r.x - l.x) * ml / (ml - mr)
            };
            out.push(Crossing { row, y, x, rising: mr > 0.0 });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFit {
    /// Least-squares `c` in `T_A + T_B = c`.
    pub c: f64,
    /// `kappa / ln(1 + sqrt 2)`.
    pub expected: f64,
    pub relative_deviation: f64,
    /// Slope of a free linear fit `T_B = a + b T_A`; `-1` for a perfect line of that family.
    pub slope: f64,
    pub rms_residual: f64,
    pub points: usize,
}

/// Fits the entanglement boundary of a `T_A x T_B` map inside the band
/// `|T_B - T_A| <= band * (T_A + T_B) / 2`. `None` if fewer than two boundary
/// points fall in the band.
pub fn entanglement_boundary_fit(map: &RegionMap, band: f64) -> Result<Option<BoundaryFit>> {
    let swapped = match (map.config.x.axis, map.config.y.axis) {
        (Axis::TA, Axis::TB) => false,
        (Axis::TB, Axis::TA) => true,
        _ => return Err(Error::InvalidSweep("boundary fit needs a T_A x T_B map".into())),
    };
    let pts: Vec<(f64, f64)> = boundary_crossings(map, Criterion::Entanglement, true)?
        .into_iter()
        .map(|c| if swapped { (c.y, c.x) } else { (c.x, c.y) })
        .filter(|&(ta, tb)| (tb - ta).abs() <= band * 0.5 * (ta + tb))
        .collect();
    if pts.len() < 2 {
        return Ok(None);
    }
    let n = pts.len() as f64;
    let c = pts.iter().map(|(a, b)| a + b).sum::<f64>() / n;
    let rms_residual = (pts.iter().map(|(a, b)| (a + b - c).powi(2)).sum::<f64>() / n).sqrt();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
    let slope = if sxx > 0.0 { sxy / sxx } else { f64::NAN };
    let expected = map.config.base.params.kappa / (1.0 + std::f64::consts::SQRT_2).ln();
    Ok(Some(BoundaryFit {
        c,
        expected,
        relative_deviation: (c - expected).abs() / expected,
        slope,
        rms_residual,
        points: pts.len(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::point::OperatingPoint;
    use crate::analysis::sweep::{AxisRange, SweepConfig};
    use crate::model::SystemParams;

    fn blank(x: f64, y: f64) -> CellResult {
        CellResult {
            x,
            y,
            entangled: true,
            steer_ab: true,
            steer_ba: true,
            bell: true,
            margin_ent: 1.0,
            margin_ab: 1.0,
            margin_ba: 1.0,
            margin_bell: 1.0,
            current_b: 0.0,
            sigma: 0.0,
            positivity_ok: true,
            min_eigenvalue: 0.1,
        }
    }

    fn synthetic() -> RegionMap {
        let p = SystemParams::new(1.0, 1.0, 3.0, 0.01).unwrap();
        let config = SweepConfig {
            base: OperatingPoint::bose(p, 0.5, 0.5),
            x: AxisRange::new(Axis::TA, 0.0, 1.0, 3),
            y: AxisRange::new(Axis::TB, 0.0, 1.0, 2),
        };
        let xs = config.x.values();
        let ys = config.y.values();
        let cells = ys.iter().flat_map(|&y| xs.iter().map(move |&x| blank(x, y))).collect();
        RegionMap { config, xs, ys, cells }
    }

    #[test]
    fn planted_violation_is_the_only_report() {
        let mut m = synthetic();
        assert!(hierarchy_check(&m).is_empty());
        m.cells[4].steer_ba = false;
        let v = hierarchy_check(&m);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].index, 4);
        assert_eq!((v[0].x, v[0].y), (0.5, 1.0));
    }

    #[test]
    fn masked_cells_are_skipped() {
        let mut m = synthetic();
        m.cells[0].entangled = false;
        m.cells[0].positivity_ok = false;
        assert!(hierarchy_check(&m).is_empty());
    }

    #[test]
    fn interpolated_crossing() {
        let mut m = synthetic();
        m.cells[0].margin_ent = -1.0;
        m.cells[1].margin_ent = 3.0;
        let c = boundary_crossings(&m, Criterion::Entanglement, false).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c[0].x - 0.125).abs() < 1e-15 && c[0].rising && c[0].row == 0);
    }

    #[test]
    fn fit_requires_temperature_axes() {
        let mut m = synthetic();
        m.config.x.axis = Axis::Kappa;
        assert!(entanglement_boundary_fit(&m, 0.2).is_err());
    }
}
