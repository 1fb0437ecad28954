//! Steady-state heat and particle currents and entropy production.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::{build_generator, Generator, Reservoir, Setup};
use crate::model::SystemParams;
use crate::rates::{ReservoirSpec, Statistics};
use crate::steady::{steady_state, SteadyResult};

/// Residual above which a state is not accepted as steady for current evaluation.
pub const STEADY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observable {
    Energy,
    ParticleNumber,
}

/// `current_j > 0` means flow from reservoir `j` into the qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransportReport {
    pub current_a: f64,
    pub current_b: f64,
    pub sigma: f64,
    pub observable: Observable,
}

pub fn currents(g: &Generator, ss: &SteadyResult) -> Result<TransportReport> {
    let v = ss.vector.0;
    let residual = (g.total() * v).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if residual > STEADY_TOL {
        return Err(Error::NotSteady(residual));
    }
    let (observable, weights) = match g.setup() {
        Setup::WeakFermi => (Observable::ParticleNumber, [0.0, 1.0, 1.0, 2.0]),
        Setup::WeakBose | Setup::StrongBose => (Observable::Energy, g.eigen().energies),
    };
    let flow = |which| {
        let dv = g.reservoir_part(which) * v;
        (0..4).map(|k| weights[k] * dv[k].re).sum::<f64>()
    };
    let mut report = TransportReport {
        current_a: flow(Reservoir::A),
        current_b: flow(Reservoir::B),
        sigma: 0.0,
        observable,
    };
    let (ra, rb) = g.reservoirs();
    report.sigma = entropy_production(&report, ra, rb)?;
    Ok(report)
}

pub fn entropy_production(t: &TransportReport, ra: &ReservoirSpec, rb: &ReservoirSpec) -> Result<f64> {
    if ra.statistics != rb.statistics {
        return Err(Error::MixedStatistics);
    }
    match ra.statistics {
        Statistics::Bose => Ok(t.current_b * (1.0 / ra.temperature - 1.0 / rb.temperature)),
        Statistics::Fermi => {
            if ra.temperature != rb.temperature {
                return Err(Error::Unsupported(
                    "fermionic entropy production needs equal reservoir temperatures".into(),
                ));
            }
            Ok(t.current_b * (rb.mu - ra.mu) / ra.temperature)
        }
    }
}

/// Steady current into the qubits from reservoir B for temperatures `(t_a, t_b)`.
pub fn bose_current_b(p: &SystemParams, t_a: f64, t_b: f64) -> Result<f64> {
    let ra = ReservoirSpec::bose(t_a)?;
    let rb = ReservoirSpec::bose(t_b)?;
    let g = build_generator(p, &ra, &rb)?;
    let ss = steady_state(&g)?;
    Ok(currents(&g, &ss)?.current_b)
}

/// `|I(T_B > T_A)| / |I(T_A > T_B)|` for the bias `delta` split symmetrically around
/// `base.temperature`. A ratio above one means the flow from A to B is the weaker one.
pub fn rectification(p: &SystemParams, base: &ReservoirSpec, delta: f64) -> Result<f64> {
    if base.statistics != Statistics::Bose {
        return Err(Error::Unsupported("rectification is defined for bosonic reservoirs".into()));
    }
    if !(delta > 0.0 && delta < 2.0 * base.temperature) {
        return Err(Error::InvalidParameter(format!(
            "bias {delta} must lie in (0, 2 T) with T = {}",
            base.temperature
        )));
    }
    let (lo, hi) = (base.temperature - 0.5 * delta, base.temperature + 0.5 * delta);
    let forward = bose_current_b(p, lo, hi)?;
    let backward = bose_current_b(p, hi, lo)?;
    Ok(forward.abs() / backward.abs())
}
