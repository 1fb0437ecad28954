//! Steady states, time evolution and the closed-form equilibrium states.

use nalgebra::{Schur, SMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::generator::{Generator, Matrix6c, StateVector6, Vector6c};
use crate::model::{
    basis_change, c, derive_params, hamiltonian_matrix, Basis, DensityMatrix4,
    Matrix4c, Phase, SystemParams, POSITIVITY_TOL,
};
use crate::rates::{occupation, transition_energies, ReservoirSpec, Statistics};

/// Largest accepted `||M v||_inf` for a steady state.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyResult {
    pub state_energy: DensityMatrix4,
    pub state_local: DensityMatrix4,
    pub vector: StateVector6,
    pub residual: f64,
    pub min_eigenvalue: f64,
    pub positivity_ok: bool,
    /// Hermiticity defect of the raw null vector before symmetrization.
    pub hermiticity_defect: f64,
}

fn inf_norm(v: &Vector6c) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Row-sum norm of a 6x6 matrix.
pub fn matrix_inf_norm(m: &Matrix6c) -> f64 {
    (0..6).map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Eigenvalues of `m` sorted by magnitude.
pub fn eigenvalues_by_magnitude(m: &Matrix6c) -> Vec<Complex64> {
    let (_, t) = Schur::new(*m).unpack();
    let mut ev: Vec<Complex64> = t.diagonal().iter().copied().collect();
    ev.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    ev
}

/// Symmetrizes the coherence pair, drops imaginary population parts and fixes the trace.
fn hermitize(v: &Vector6c) -> Vector6c {
    let mut out = *v;
    for k in 0..4 {
        out[k] = c(v[k].re);
    }
    let coh = 0.5 * (v[4] + v[5].conj());
    out[4] = coh;
    out[5] = coh.conj();
    let tr: f64 = (0..4).map(|k| out[k].re).sum();
    out / c(tr)
}

pub fn steady_state(g: &Generator) -> Result<SteadyResult> {
    let m = g.total();
    let ev = eigenvalues_by_magnitude(m);
    let (smallest, second) = (ev[0].norm(), ev[1].norm());
    if second < 10.0 * smallest {
        return Err(Error::DegenerateSteadyState { smallest, second });
    }

    // The population rows are linearly dependent (trace preservation), so one
    // of them is traded for the normalization condition.
    let mut a: SMatrix<Complex64, 6, 6> = *m;
    for j in 0..6 {
        a[(0, j)] = c(if j < 4 { 1.0 } else { 0.0 });
    }
    let mut rhs = Vector6c::zeros();
    rhs[0] = c(1.0);
    let raw = a
        .lu()
        .solve(&rhs)
        .ok_or(Error::DegenerateSteadyState { smallest, second })?;

    let hermiticity_defect = StateVector6(raw).hermiticity_defect();
    if hermiticity_defect > 1e-9 {
        log::warn!("steady null vector deviates from Hermiticity by {hermiticity_defect:e}");
    }
    let v = hermitize(&raw);
    let residual = inf_norm(&(m * v));
    if residual > RESIDUAL_TOL {
        return Err(Error::NotSteady(residual));
    }
    let vector = StateVector6(v);
    let state_energy = DensityMatrix4::new(vector.to_matrix(), Basis::Energy)?;
    let state_local = basis_change(&state_energy, Basis::Local, g.eigen());
    let min_eigenvalue = state_energy.min_eigenvalue();
    Ok(SteadyResult {
        state_energy,
        state_local,
        vector,
        residual,
        min_eigenvalue,
        positivity_ok: min_eigenvalue >= -POSITIVITY_TOL,
        hermiticity_defect,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: StateVector6,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectory always holds the initial point")
    }

    /// Largest deviation of the population sum from its initial value.
    pub fn trace_drift(&self) -> f64 {
        let t0 = self.points[0].state.population_sum();
        self.points.iter().map(|p| (p.state.population_sum() - t0).norm()).fold(0.0, f64::max)
    }

    pub fn density(&self, k: usize) -> DensityMatrix4 {
        DensityMatrix4::from_raw(self.points[k].state.to_matrix(), Basis::Energy)
    }
}

/// Largest stable step for [`evolve`].
pub fn max_step(g: &Generator) -> f64 {
    0.1 / matrix_inf_norm(g.total())
}

pub fn evolve(g: &Generator, rho0: &DensityMatrix4, t_final: f64, dt: f64) -> Result<Trajectory> {
    evolve_sampled(g, rho0, t_final, dt, 1)
}

/// Fixed-step RK4 integration, keeping every `stride`-th step and the final one.
pub fn evolve_sampled(
    g: &Generator,
    rho0: &DensityMatrix4,
    t_final: f64,
    dt: f64,
    stride: usize,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!("need dt > 0 and t_final >= 0, got {dt}, {t_final}")));
    }
    let max = max_step(g);
    if dt > max {
        return Err(Error::UnstableStep { dt, max });
    }
    let stride = stride.max(1);
    let start = match rho0.basis() {
        Basis::Energy => rho0.clone(),
        Basis::Local => basis_change(rho0, Basis::Energy, g.eigen()),
    };
    let m = *g.total();
    let mut v = StateVector6::from_energy(&start)?.0;
    let steps = (t_final / dt).round() as usize;
    let mut points = Vec::with_capacity(steps / stride + 2);
    points.push(TrajectoryPoint { t: 0.0, state: StateVector6(v) });
    let h = c(dt);
    let half = c(0.5 * dt);
    for n in 1..=steps {
        let k1 = m * v;
        let k2 = m * (v + k1 * half);
        let k3 = m * (v + k2 * half);
        let k4 = m * (v + k3 * h);
        v += (k1 + k2 * c(2.0) + k3 * c(2.0) + k4) * c(dt / 6.0);
        if n % stride == 0 || n == steps {
            points.push(TrajectoryPoint { t: n as f64 * dt, state: StateVector6(v) });
        }
    }
    Ok(Trajectory { points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumState {
    pub energy: DensityMatrix4,
    pub local: DensityMatrix4,
}

/// Closed-form equilibrium state in both bases.
///
/// The local-basis matrix is assembled from its own closed form, not by rotating
/// the energy-basis one, so the two can be cross-checked.
pub fn equilibrium_analytic(p: &SystemParams, r: &ReservoirSpec) -> Result<EquilibriumState> {
    r.validate()?;
    let d = derive_params(p)?;
    if d.phase == Phase::Strong && r.statistics == Statistics::Fermi {
        return Err(Error::Unsupported("fermionic strong-coupling phase".into()));
    }
    let e = transition_energies(&d);
    let np = occupation(r, e.eps_plus)?;
    let nq = occupation(r, e.eps_minus)?;
    let cos2 = (0.5 * d.theta).cos().powi(2);
    let sin2 = (0.5 * d.theta).sin().powi(2);
    let st = d.theta.sin();

    let (energy_pops, local_pops, rho23) = match (r.statistics, d.phase) {
        (Statistics::Bose, Phase::Weak) => {
            let rr = (1.0 + 2.0 * np) * (1.0 + 2.0 * nq);
            (
                [(1.0 + np) * (1.0 + nq), nq * (1.0 + np), np * (1.0 + nq), np * nq].map(|x| x / rr),
                [
                    (1.0 + np) * (1.0 + nq),
                    sin2 * np + cos2 * nq + np * nq,
                    cos2 * np + sin2 * nq + np * nq,
                    np * nq,
                ]
                .map(|x| x / rr),
                st * (np - nq) / (2.0 * rr),
            )
        }
        (Statistics::Bose, Phase::Strong) => {
            let rr = (1.0 + 2.0 * np) * (1.0 + 2.0 * nq);
            let s = 1.0 + np + nq;
            (
                [(1.0 + np) * (1.0 + nq), nq * (1.0 + np), np * (1.0 + nq), np * nq].map(|x| x / rr),
                [(1.0 + np) * nq, cos2 * s + np * nq, sin2 * s + np * nq, (1.0 + nq) * np].map(|x| x / rr),
                -st * s / (2.0 * rr),
            )
        }
        (Statistics::Fermi, _) => (
            [(1.0 - np) * (1.0 - nq), nq * (1.0 - np), np * (1.0 - nq), np * nq],
            [
                (1.0 - np) * (1.0 - nq),
                sin2 * np + cos2 * nq - np * nq,
                cos2 * np + sin2 * nq - np * nq,
                np * nq,
            ],
            0.5 * st * (np - nq),
        ),
    };
    let energy = DensityMatrix4::diagonal(energy_pops, Basis::Energy)?;
    let mut local = Matrix4c::from_diagonal(&nalgebra::Vector4::from(local_pops.map(c)));
    local[(1, 2)] = c(rho23);
    local[(2, 1)] = c(rho23);
    let local = DensityMatrix4::new(local, Basis::Local)?;
    Ok(EquilibriumState { energy, local })
}

/// Closed-form state for a reservoir pair, rejecting unequal reservoirs.
pub fn equilibrium_analytic_pair(
    p: &SystemParams,
    ra: &ReservoirSpec,
    rb: &ReservoirSpec,
) -> Result<EquilibriumState> {
    if ra != rb {
        return Err(Error::NotEquilibrium);
    }
    equilibrium_analytic(p, ra)
}

/// Grand-canonical state `exp(-(H - mu N)/T) / Z` in the local basis, obtained by
/// diagonalizing `H - mu N` numerically.
pub fn thermal_state(p: &SystemParams, r: &ReservoirSpec) -> Result<DensityMatrix4> {
    r.validate()?;
    let number = Matrix4c::from_diagonal(&nalgebra::Vector4::new(c(0.0), c(1.0), c(1.0), c(2.0)));
    let k = hamiltonian_matrix(p) - number * c(r.mu);
    let eig = k.symmetric_eigen();
    let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let weights = eig.eigenvalues.map(|l| (-(l - lo) / r.temperature).exp());
    let z: f64 = weights.iter().sum();
    let d = Matrix4c::from_diagonal(&weights.map(|w| c(w / z)));
    let rho = eig.eigenvectors * d * eig.eigenvectors.adjoint();
    DensityMatrix4::new((rho + rho.adjoint()) * c(0.5), Basis::Local)
}

/// Energy-basis coherence `rho_e1e2` of the steady state.
pub fn steady_coherence(s: &SteadyResult) -> Complex64 {
    s.vector.coherence()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::build_generator;

    fn gen(p: SystemParams, ta: f64, tb: f64) -> Generator {
        build_generator(&p, &ReservoirSpec::bose(ta).unwrap(), &ReservoirSpec::bose(tb).unwrap()).unwrap()
    }

    #[test]
    fn symmetric_equilibrium_has_equal_local_populations() {
        let g = gen(SystemParams::new(1.0, 1.0, 0.7, 0.01).unwrap(), 0.4, 0.4);
        let s = steady_state(&g).unwrap();
        let pops = s.state_local.populations();
        assert!((pops[1] - pops[2]).abs() < 1e-14);
        assert!(s.positivity_ok);
        assert!(s.residual < RESIDUAL_TOL);
    }

    #[test]
    fn nonequilibrium_coherence_vanishes_with_bias() {
        let p = SystemParams::new(1.5, 0.5, 1.0, 0.01).unwrap();
        let mut last = f64::INFINITY;
        for dt in [0.4, 0.2, 0.1, 0.05, 0.0] {
            let s = steady_state(&gen(p, 0.5 - dt / 2.0, 0.5 + dt / 2.0)).unwrap();
            let coh = steady_coherence(&s).norm();
            assert!(coh < last);
            if dt > 0.0 {
                assert!(coh > 1e-8);
            } else {
                assert!(coh < 1e-12);
            }
            last = coh;
        }
    }

    #[test]
    fn weak_ground_state_limit() {
        let p = SystemParams::new(1.2, 0.8, 0.5, 0.01).unwrap();
        let eq = equilibrium_analytic(&p, &ReservoirSpec::bose(0.005).unwrap()).unwrap();
        assert!((eq.local.get(0, 0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn strong_ground_state_limit() {
        let p = SystemParams::new(1.5, 0.5, 3.0, 0.01).unwrap();
        let theta = derive_params(&p).unwrap().theta;
        let eq = equilibrium_analytic(&p, &ReservoirSpec::bose(0.005).unwrap()).unwrap();
        assert!((eq.local.get(1, 2).re + theta.sin() / 2.0).abs() < 1e-12);
        assert!((eq.local.get(1, 1).re - (theta / 2.0).cos().powi(2)).abs() < 1e-12);
        assert!((eq.local.get(2, 2).re - (theta / 2.0).sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn analytic_pair_rejects_bias() {
        let p = SystemParams::new(1.0, 1.0, 0.5, 0.01).unwrap();
        let ra = ReservoirSpec::bose(0.3).unwrap();
        let rb = ReservoirSpec::bose(0.4).unwrap();
        assert_eq!(equilibrium_analytic_pair(&p, &ra, &rb), Err(Error::NotEquilibrium));
    }

    #[test]
    fn unstable_step_rejected() {
        let g = gen(SystemParams::new(1.0, 1.0, 0.5, 0.01).unwrap(), 0.3, 0.3);
        let rho = DensityMatrix4::maximally_mixed(Basis::Energy);
        let max = max_step(&g);
        assert!(matches!(evolve(&g, &rho, 1.0, 2.0 * max), Err(Error::UnstableStep { .. })));
    }

    #[test]
    fn steady_state_is_fixed_point_of_evolution() {
        let g = gen(SystemParams::new(1.5, 0.5, 1.0, 0.01).unwrap(), 0.3, 0.6);
        let s = steady_state(&g).unwrap();
        let tr = evolve_sampled(&g, &s.state_energy, 50.0, max_step(&g), 100).unwrap();
        for pt in &tr.points {
            assert!(inf_norm(&(pt.state.0 - s.vector.0)) < 1e-10);
        }
    }

    #[test]
    fn unitary_limit_conserves_coherence() {
        let g = gen(SystemParams::new(1.5, 0.5, 1.0, 0.01).unwrap(), 0.3, 0.6).coherent_only();
        let e = g.eigen();
        let mut amps = [c(0.0); 4];
        for i in 0..4 {
            amps[i] = (e.vectors[(i, 1)] + e.vectors[(i, 2)]) * c(0.5f64.sqrt());
        }
        let rho = DensityMatrix4::pure(amps, Basis::Local).unwrap();
        let tr = evolve_sampled(&g, &rho, 20.0, 0.01, 10).unwrap();
        let c0 = tr.points[0].state.coherence();
        let w = g.derived().coherence_frequency();
        for pt in &tr.points {
            let z = pt.state.coherence();
            assert!((z.norm() - c0.norm()).abs() < 1e-9);
            let want = c0 * Complex64::new(0.0, w * pt.t).exp();
            assert!((z - want).norm() < 1e-8);
        }
    }
}
