use serde::{Deserialize, Serialize};

use super::point::{evaluate, Axis, OperatingPoint};
use crate::error::{Error, Result};
use crate::model::{phase_boundary, BOUNDARY_GUARD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[serde(rename = "a_to_b")]
    AtoB,
    #[serde(rename = "b_to_a")]
    BtoA,
    TwoWay,
    Entanglement,
    Bell,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub kappa_threshold: f64,
    pub direction: Criterion,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub residual_margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ThresholdOutcome {
    Found(ThresholdResult),
    NoSignChange { bracket: (f64, f64), margin_lo: f64, margin_hi: f64 },
}

impl ThresholdOutcome {
    pub fn kappa(&self) -> Option<f64> {
        match self {
            Self::Found(r) => Some(r.kappa_threshold),
            Self::NoSignChange { .. } => None,
        }
    }
}

/// Margin of `criterion` at `op`; positive where the criterion holds.
pub fn criterion_margin(op: &OperatingPoint, criterion: Criterion) -> Result<f64> {
    let r = evaluate(op)?.correlations;
    Ok(match criterion {
        Criterion::AtoB => r.steer_a_to_b.margin,
        Criterion::BtoA => r.steer_b_to_a.margin,
        Criterion::TwoWay => r.steer_a_to_b.margin.min(r.steer_b_to_a.margin),
        Criterion::Entanglement => r.entangled.margin,
        Criterion::Bell => r.bell.margin,
    })
}

const PRESCAN: usize = 8;

/// Bisection in `kappa` on a bracket inside one coupling phase.
///
/// An 8-point pre-scan locates the sign change; more than one change is
/// reported as an error since the margin is assumed monotone on the bracket.
pub fn threshold_kappa(fixed: &OperatingPoint, criterion: Criterion, bracket: (f64, f64)) -> Result<ThresholdOutcome> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::Threshold(format!("invalid bracket ({lo}, {hi})")));
    }
    let p = fixed.params;
    let boundary = phase_boundary(p.eps_a, p.eps_b);
    if lo < boundary && hi > boundary {
        return Err(Error::Threshold(format!("bracket ({lo}, {hi}) straddles the phase boundary {boundary}")));
    }
    let margin = |k: f64| criterion_margin(&fixed.with(Axis::Kappa, k), criterion);

    let ks: Vec<f64> = (0..PRESCAN)
        .map(|i| if i + 1 == PRESCAN { hi } else { lo + (hi - lo) * i as f64 / (PRESCAN - 1) as f64 })
        .collect();
    let ms = ks.iter().map(|&k| margin(k)).collect::<Result<Vec<_>>>()?;
    let changes: Vec<usize> = (0..PRESCAN - 1).filter(|&i| (ms[i] > 0.0) != (ms[i + 1] > 0.0)).collect();
    match changes.len() {
        0 => {
            return Ok(ThresholdOutcome::NoSignChange { bracket, margin_lo: ms[0], margin_hi: ms[PRESCAN - 1] })
        }
        1 => {}
        n => return Err(Error::Threshold(format!("margin changes sign {n} times on ({lo}, {hi})"))),
    }
    let i = changes[0];
    let (mut a, mut b) = (ks[i], ks[i + 1]);
    let lo_positive = ms[i] > 0.0;
    let tol = 1e-10 * p.bar_eps();
    let mut iterations = 0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if (margin(mid)? > 0.0) == lo_positive {
            a = mid;
        } else {
            b = mid;
        }
        iterations += 1;
    }
    let k = 0.5 * (a + b);
    Ok(ThresholdOutcome::Found(ThresholdResult {
        kappa_threshold: k,
        direction: criterion,
        bracket,
        iterations,
        residual_margin: margin(k)?,
    }))
}

/// Scans `n` couplings in `(lo, hi)` and returns the first sub-bracket with a
/// sign change of the margin that stays within one phase.
pub fn auto_bracket(fixed: &OperatingPoint, criterion: Criterion, lo: f64, hi: f64, n: usize) -> Result<Option<(f64, f64)>> {
    let p = fixed.params;
    let boundary = phase_boundary(p.eps_a, p.eps_b);
    let guard = 10.0 * BOUNDARY_GUARD * p.bar_eps();
    let n = n.max(2);
    let ks: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .filter(|k| (k - boundary).abs() > guard && *k > 0.0)
        .collect();
    let mut prev: Option<(f64, f64)> = None;
    for &k in &ks {
        let m = criterion_margin(&fixed.with(Axis::Kappa, k), criterion)?;
        if let Some((pk, pm)) = prev {
            let same_phase = (pk < boundary) == (k < boundary);
            if same_phase && (pm > 0.0) != (m > 0.0) {
                return Ok(Some((pk, k)));
            }
        }
        prev = Some((k, m));
    }
    Ok(None)
}
