//! Two-qubit XY Hamiltonian, its eigensystem and basis handling.
//!
//! Local basis order is `(|00>, |01>, |10>, |11>)`. Energy basis order is
//! `(g, e1, e2, e3)`, ascending in energy.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Matrix4c = Matrix4<Complex64>;

/// Negative eigenvalues above this are still accepted as a physical state.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Hermiticity and unit-trace tolerance for [`DensityMatrix4`].
pub const STATE_TOL: f64 = 1e-12;
/// Relative width (in units of `bar_eps`) of the excluded band around the phase boundary.
pub const BOUNDARY_GUARD: f64 = 1e-6;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub eps_a: f64,
    pub eps_b: f64,
    pub kappa: f64,
    pub gamma: f64,
}

impl SystemParams {
    pub fn new(eps_a: f64, eps_b: f64, kappa: f64, gamma: f64) -> Result<Self> {
        let p = Self { eps_a, eps_b, kappa, gamma };
        p.validate()?;
        Ok(p)
    }

    /// Builds parameters from the mean level `bar_eps` and the detuning `delta_eps`.
    pub fn from_mean(bar_eps: f64, delta_eps: f64, kappa: f64, gamma: f64) -> Result<Self> {
        Self::new(bar_eps + delta_eps / 2.0, bar_eps - delta_eps / 2.0, kappa, gamma)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.eps_a, self.eps_b, self.kappa, self.gamma];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("parameters must be finite".into()));
        }
        if self.eps_b <= 0.0 {
            return Err(Error::InvalidParameter(format!("eps_b = {} must be > 0", self.eps_b)));
        }
        if self.eps_a < self.eps_b {
            return Err(Error::InvalidParameter(format!(
                "eps_a = {} must be >= eps_b = {}",
                self.eps_a, self.eps_b
            )));
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParameter(format!("kappa = {} must be > 0", self.kappa)));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!("gamma = {} must be > 0", self.gamma)));
        }
        if self.gamma > 0.1 * self.eps_b {
            log::warn!(
                "gamma = {} exceeds 0.1 * eps_b; the weak system-reservoir approximation is doubtful",
                self.gamma
            );
        }
        Ok(())
    }

    pub fn bar_eps(&self) -> f64 {
        0.5 * (self.eps_a + self.eps_b)
    }

    pub fn delta_eps(&self) -> f64 {
        self.eps_a - self.eps_b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Weak,
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub bar_eps: f64,
    pub delta_eps: f64,
    pub omega: f64,
    pub theta: f64,
    pub phase: Phase,
}

impl DerivedParams {
    /// Energy gap between `e1` and `e2`, the oscillation frequency of the `e1 e2` coherence.
    pub fn coherence_frequency(&self) -> f64 {
        match self.phase {
            Phase::Weak => 2.0 * self.omega,
            Phase::Strong => 2.0 * self.bar_eps,
        }
    }
}

/// Coupling at which `|00>` and `psi-` cross.
pub fn phase_boundary(eps_a: f64, eps_b: f64) -> f64 {
    2.0 * (eps_a * eps_b).sqrt()
}

pub fn derive_params(p: &SystemParams) -> Result<DerivedParams> {
    p.validate()?;
    let bar_eps = p.bar_eps();
    let delta_eps = p.delta_eps();
    let boundary = phase_boundary(p.eps_a, p.eps_b);
    if (p.kappa - boundary).abs() < BOUNDARY_GUARD * bar_eps {
        return Err(Error::NearPhaseBoundary { kappa: p.kappa, boundary });
    }
    let omega = 0.5 * delta_eps.hypot(p.kappa);
    let theta = p.kappa.atan2(delta_eps);
    let phase = if p.kappa > boundary { Phase::Strong } else { Phase::Weak };
    Ok(DerivedParams { bar_eps, delta_eps, omega, theta, phase })
}

/// Hamiltonian in the local basis. No validation, so `kappa = 0` is allowed here.
pub fn hamiltonian_matrix(p: &SystemParams) -> Matrix4c {
    let bar = p.bar_eps();
    let half_d = 0.5 * p.delta_eps();
    let half_k = 0.5 * p.kappa;
    let mut h = Matrix4c::zeros();
    h[(0, 0)] = c(-bar);
    h[(1, 1)] = c(-half_d);
    h[(2, 2)] = c(half_d);
    h[(3, 3)] = c(bar);
    h[(1, 2)] = c(half_k);
    h[(2, 1)] = c(half_k);
    h
}

/// Local-basis amplitudes of `psi-(theta)` and `psi+(theta)`.
pub fn entangled_vectors(theta: f64) -> ([f64; 4], [f64; 4]) {
    let (s, co) = (0.5 * theta).sin_cos();
    ([0.0, co, -s, 0.0], [0.0, s, co, 0.0])
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    /// Ascending energies of `(g, e1, e2, e3)`.
    pub energies: [f64; 4],
    /// Column `k` holds the local-basis amplitudes of eigenvector `k`.
    pub vectors: Matrix4c,
    pub phase: Phase,
    pub theta: f64,
}

impl EigenSystem {
    pub const LABELS: [&'static str; 4] = ["g", "e1", "e2", "e3"];

    pub fn vector(&self, k: usize) -> [Complex64; 4] {
        let col = self.vectors.column(k);
        [col[0], col[1], col[2], col[3]]
    }
}

pub fn eigensystem(p: &SystemParams) -> Result<EigenSystem> {
    let d = derive_params(p)?;
    let (minus, plus) = entangled_vectors(d.theta);
    let ground_local = [1.0, 0.0, 0.0, 0.0];
    let top_local = [0.0, 0.0, 0.0, 1.0];
    let (energies, cols) = match d.phase {
        Phase::Weak => (
            [-d.bar_eps, -d.omega, d.omega, d.bar_eps],
            [ground_local, minus, plus, top_local],
        ),
        Phase::Strong => (
            [-d.omega, -d.bar_eps, d.bar_eps, d.omega],
            [minus, ground_local, top_local, plus],
        ),
    };
    let vectors = Matrix4c::from_fn(|i, k| c(cols[k][i]));
    Ok(EigenSystem { energies, vectors, phase: d.phase, theta: d.theta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Local,
    Energy,
}

/// Hermitian, unit-trace 4x4 matrix tagged with its basis.
///
/// Positivity is not enforced at construction: Bloch-Redfield steady states may
/// violate it slightly and callers are expected to inspect [`min_eigenvalue`].
///
/// [`min_eigenvalue`]: DensityMatrix4::min_eigenvalue
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix4 {
    entries: Matrix4c,
    basis: Basis,
}

impl DensityMatrix4 {
    pub fn new(entries: Matrix4c, basis: Basis) -> Result<Self> {
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm = (entries - entries.adjoint()).camax();
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = entries.trace();
        if (tr - c(1.0)).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        Ok(Self { entries, basis })
    }

    pub(crate) fn from_raw(entries: Matrix4c, basis: Basis) -> Self {
        Self { entries, basis }
    }

    pub fn maximally_mixed(basis: Basis) -> Self {
        Self { entries: Matrix4c::identity() * c(0.25), basis }
    }

    /// Projector onto a normalized copy of `amplitudes`.
    pub fn pure(amplitudes: [Complex64; 4], basis: Basis) -> Result<Self> {
        let v = nalgebra::Vector4::from(amplitudes);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let v = v / c(norm);
        Ok(Self { entries: v * v.adjoint(), basis })
    }

    pub fn diagonal(pops: [f64; 4], basis: Basis) -> Result<Self> {
        Self::new(Matrix4c::from_diagonal(&nalgebra::Vector4::from(pops.map(c))), basis)
    }

    pub fn entries(&self) -> &Matrix4c {
        &self.entries
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|k| self.entries[(k, k)].re)
    }

    /// Spectrum in ascending order.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let ev = self.entries.symmetric_eigenvalues();
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue() >= -POSITIVITY_TOL
    }
}

/// Unitary change between local and energy bases using the eigenvector columns.
pub fn basis_change(rho: &DensityMatrix4, target: Basis, eig: &EigenSystem) -> DensityMatrix4 {
    let v = &eig.vectors;
    let entries = match (rho.basis, target) {
        (a, b) if a == b => rho.entries,
        (Basis::Local, Basis::Energy) => v.adjoint() * rho.entries * v,
        (Basis::Energy, Basis::Local) => v * rho.entries * v.adjoint(),
        _ => unreachable!(),
    };
    DensityMatrix4 { entries, basis: target }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

    #[test]
    fn symmetric_derived_values() {
        let d = derive_params(&SystemParams::new(1.0, 1.0, 1.0, 0.01).unwrap()).unwrap();
        assert_eq!(d.bar_eps, 1.0);
        assert_eq!(d.delta_eps, 0.0);
        assert_abs_diff_eq!(d.omega, 0.5, epsilon = 1e-15);
        assert_eq!(d.theta, FRAC_PI_2);
        assert_eq!(d.phase, Phase::Weak);
    }

    #[test]
    fn detuned_derived_values() {
        let d = derive_params(&SystemParams::new(1.5, 0.5, 1.0, 0.01).unwrap()).unwrap();
        assert_abs_diff_eq!(d.omega, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(d.theta, FRAC_PI_4, epsilon = 1e-15);
        assert_eq!(d.phase, Phase::Weak);
        assert_abs_diff_eq!(phase_boundary(1.5, 0.5), 3f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn strong_phase_at_three() {
        let d = derive_params(&SystemParams::new(1.0, 1.0, 3.0, 0.01).unwrap()).unwrap();
        assert_eq!(d.phase, Phase::Strong);
        assert!(d.omega > d.bar_eps);
    }

    #[test]
    fn boundary_guard() {
        let p = SystemParams::new(1.0, 1.0, 2.0 + 1e-8, 0.01).unwrap();
        assert!(matches!(derive_params(&p), Err(Error::NearPhaseBoundary { .. })));
        let p = SystemParams::new(1.0, 1.0, 2.0 + 1e-5, 0.01).unwrap();
        assert!(derive_params(&p).is_ok());
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SystemParams::new(0.5, 1.0, 1.0, 0.01).is_err());
        assert!(SystemParams::new(1.0, 0.0, 1.0, 0.01).is_err());
        assert!(SystemParams::new(1.0, 1.0, 0.0, 0.01).is_err());
        assert!(SystemParams::new(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, f64::NAN, 0.01).is_err());
    }

    #[test]
    fn uncoupled_hamiltonian() {
        let p = SystemParams { eps_a: 1.0, eps_b: 1.0, kappa: 0.0, gamma: 0.01 };
        let h = hamiltonian_matrix(&p);
        let want = Matrix4c::from_diagonal(&nalgebra::Vector4::new(c(-1.0), c(0.0), c(0.0), c(1.0)));
        assert_eq!(h, want);
    }

    #[test]
    fn hamiltonian_spectrum_matches_closed_form() {
        let p = SystemParams::new(1.5, 0.5, 1.0, 0.01).unwrap();
        let mut ev: Vec<f64> = hamiltonian_matrix(&p).symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let r = 0.5f64.sqrt();
        for (a, b) in ev.iter().zip([-1.0, -r, r, 1.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        let p = SystemParams::new(1.0, 1.0, 1.0, 0.01).unwrap();
        let h = hamiltonian_matrix(&p);
        let block = nalgebra::Matrix2::new(h[(1, 1)], h[(1, 2)], h[(2, 1)], h[(2, 2)]);
        let mut ev: Vec<f64> = block.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(ev[0], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ev[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn detuned_eigenpairs() {
        for (ea, eb, k) in [(1.5, 0.5, 1.0), (1.8, 0.2, 3.0), (1.2, 0.8, 0.3)] {
            let p = SystemParams::new(ea, eb, k, 0.01).unwrap();
            let h = hamiltonian_matrix(&p);
            assert_eq!(h[(1, 1)], c(-(ea - eb) / 2.0));
            let e = eigensystem(&p).unwrap();
            for i in 0..4 {
                let v = e.vectors.column(i);
                assert!((h * v - v * c(e.energies[i])).camax() < 1e-12);
            }
        }
    }

    #[test]
    fn singlet_at_resonance() {
        let e = eigensystem(&SystemParams::new(1.0, 1.0, 1.0, 0.01).unwrap()).unwrap();
        let v = e.vector(1);
        let r = 0.5f64.sqrt();
        assert_abs_diff_eq!(v[1].re, r, epsilon = 1e-15);
        assert_abs_diff_eq!(v[2].re, -r, epsilon = 1e-15);
    }

    #[test]
    fn detuned_singlet_amplitudes() {
        let e = eigensystem(&SystemParams::new(1.5, 0.5, 1.0, 0.01).unwrap()).unwrap();
        let v = e.vector(1);
        assert_abs_diff_eq!(v[1].re, FRAC_PI_8.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(v[2].re, -FRAC_PI_8.sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(v[1].re, 0.92388, epsilon = 1e-5);
    }

    #[test]
    fn small_kappa_singlet_is_product() {
        let e = eigensystem(&SystemParams::new(1.2, 0.8, 1e-12, 0.01).unwrap()).unwrap();
        let v = e.vector(1);
        assert_abs_diff_eq!(v[1].re, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v[2].re, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn strong_phase_labels() {
        let e = eigensystem(&SystemParams::new(1.0, 1.0, 3.0, 0.01).unwrap()).unwrap();
        assert_eq!(e.energies, [-1.5, -1.0, 1.0, 1.5]);
        assert_eq!(e.vector(1)[0], c(1.0));
        assert_eq!(e.vector(2)[3], c(1.0));
    }

    #[test]
    fn mixed_state_is_basis_invariant() {
        let e = eigensystem(&SystemParams::new(1.5, 0.5, 1.0, 0.01).unwrap()).unwrap();
        let rho = DensityMatrix4::maximally_mixed(Basis::Energy);
        let out = basis_change(&rho, Basis::Local, &e);
        assert!((out.entries() - Matrix4c::identity() * c(0.25)).camax() < 1e-15);
    }

    #[test]
    fn weak_ground_is_local_00() {
        let e = eigensystem(&SystemParams::new(1.3, 0.7, 0.4, 0.01).unwrap()).unwrap();
        let g = DensityMatrix4::diagonal([1.0, 0.0, 0.0, 0.0], Basis::Energy).unwrap();
        let out = basis_change(&g, Basis::Local, &e);
        assert_eq!(out.basis(), Basis::Local);
        assert!((out.get(0, 0) - c(1.0)).norm() < 1e-15);
        assert!(out.entries().iter().skip(1).all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn density_validation() {
        let mut m = Matrix4c::identity() * c(0.25);
        m[(0, 1)] = Complex64::new(0.1, 0.1);
        assert!(DensityMatrix4::new(m, Basis::Local).is_err());
        let m = Matrix4c::identity() * c(0.3);
        assert!(DensityMatrix4::new(m, Basis::Local).is_err());
    }
}
