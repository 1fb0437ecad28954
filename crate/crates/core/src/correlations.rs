//! Entanglement, directional steerability and Bell nonlocality of two-qubit states.
//!
//! Every criterion is evaluated twice where possible: by the X-state closed forms
//! and by a general matrix route (partial transpose, Horodecki criterion).
//! [`classify`] refuses to return a report when the two routes disagree.

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{basis_change, c, Basis, DensityMatrix4, EigenSystem, Matrix4c};

/// Strict inequalities use this slack at their boundary.
pub const MARGIN_SLACK: f64 = 1e-12;
/// Partial-transpose eigenvalues below `-PPT_TOL` signal entanglement.
pub const PPT_TOL: f64 = 1e-10;
/// Default tolerance for entries outside the X pattern.
pub const X_TOL: f64 = 1e-10;
/// Closed forms are used while `|rho14| <= REGIME_RATIO * |rho23|`.
pub const REGIME_RATIO: f64 = 0.1;
/// Verdicts of the two routes may differ only when both margins are this close to zero.
pub const AGREEMENT_TOL: f64 = 1e-9;

const SQRT3: f64 = 1.732_050_807_568_877_2;

fn depolarizing_weight() -> f64 {
    (3.0 - SQRT3) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    AtoB,
    BtoA,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    XClosedForm,
    GeneralPPT,
    Both,
}

/// Outcome of one criterion. `margin` is the left-minus-right slack of the inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub flag: bool,
    pub margin: f64,
}

impl Verdict {
    fn strict(margin: f64) -> Self {
        Self { flag: margin > MARGIN_SLACK, margin }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XState {
    pub rho11: f64,
    pub rho22: f64,
    pub rho33: f64,
    pub rho44: f64,
    pub rho23: Complex64,
    pub rho14: Complex64,
}

impl XState {
    pub fn to_matrix(&self) -> Matrix4c {
        let mut m = Matrix4c::zeros();
        m[(0, 0)] = c(self.rho11);
        m[(1, 1)] = c(self.rho22);
        m[(2, 2)] = c(self.rho33);
        m[(3, 3)] = c(self.rho44);
        m[(1, 2)] = self.rho23;
        m[(2, 1)] = self.rho23.conj();
        m[(0, 3)] = self.rho14;
        m[(3, 0)] = self.rho14.conj();
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringFactors {
    pub f_a: f64,
    pub f_b: f64,
}

/// Populations of `|00>`, `|11>`, `psi-`, `psi+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenPopulations {
    pub p00: f64,
    pub p11: f64,
    pub p_minus: f64,
    pub p_plus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub entangled: Verdict,
    pub steer_a_to_b: Verdict,
    pub steer_b_to_a: Verdict,
    pub bell: Verdict,
    pub eigen_populations: Option<EigenPopulations>,
    pub method: Method,
}

impl CorrelationReport {
    /// First broken link of `bell => two-way steering => entanglement`, if any.
    pub fn hierarchy_violation(&self) -> Option<&'static str> {
        if self.bell.flag && !(self.steer_a_to_b.flag && self.steer_b_to_a.flag) {
            return Some("bell nonlocal but not two-way steerable");
        }
        if (self.steer_a_to_b.flag || self.steer_b_to_a.flag) && !self.entangled.flag {
            return Some("steerable but not entangled");
        }
        None
    }
}

fn require_local(rho: &DensityMatrix4) -> Result<()> {
    if rho.basis() != Basis::Local {
        return Err(Error::InvalidState("expected a local-basis state".into()));
    }
    Ok(())
}

pub fn extract_xstate(rho: &DensityMatrix4, tol: f64) -> Result<XState> {
    require_local(rho)?;
    let m = rho.entries();
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j && i + j != 3 {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    if worst > tol {
        return Err(Error::NotXState(worst));
    }
    Ok(XState {
        rho11: m[(0, 0)].re,
        rho22: m[(1, 1)].re,
        rho33: m[(2, 2)].re,
        rho44: m[(3, 3)].re,
        rho23: m[(1, 2)],
        rho14: m[(0, 3)],
    })
}

pub fn steering_factors(x: &XState) -> SteeringFactors {
    let (r11, r22, r33, r44) = (x.rho11, x.rho22, x.rho33, x.rho44);
    let f_a = (2.0 + SQRT3) / 2.0 * r11 * r44
        + (2.0 - SQRT3) / 2.0 * r22 * r33
        + 0.25 * (r11 + r44) * (r22 + r33);
    let f_b = 0.25 * (r11 - r44) * (r22 - r33);
    SteeringFactors { f_a, f_b }
}

/// `f_b` written through eigen-populations; exact when `psi-` and `psi+` carry no coherence.
pub fn f_b_from_eigen(pops: &EigenPopulations, theta: f64) -> f64 {
    0.25 * (pops.p00 - pops.p11) * (pops.p_minus - pops.p_plus) * theta.cos()
}

fn partial_trace_a(m: &Matrix4c) -> nalgebra::Matrix2<Complex64> {
    nalgebra::Matrix2::from_fn(|b, bp| m[(b, bp)] + m[(2 + b, 2 + bp)])
}

fn partial_trace_b(m: &Matrix4c) -> nalgebra::Matrix2<Complex64> {
    nalgebra::Matrix2::from_fn(|a, ap| m[(2 * a, 2 * ap)] + m[(2 * a + 1, 2 * ap + 1)])
}

/// Depolarizes the steering party: `rho/sqrt3 + (3 - sqrt3)/3 * (I/2 (x) rho_B)` for A to B,
/// and the mirrored construction for B to A.
pub fn steering_map(rho: &DensityMatrix4, direction: Direction) -> DensityMatrix4 {
    let m = rho.entries();
    let w = depolarizing_weight();
    let noise = match direction {
        Direction::AtoB => {
            let rb = partial_trace_a(m);
            Matrix4c::from_fn(|i, j| if i / 2 == j / 2 { rb[(i % 2, j % 2)] * c(0.5) } else { c(0.0) })
        }
        Direction::BtoA => {
            let ra = partial_trace_b(m);
            Matrix4c::from_fn(|i, j| if i % 2 == j % 2 { ra[(i / 2, j / 2)] * c(0.5) } else { c(0.0) })
        }
    };
    DensityMatrix4::from_raw(m * c(1.0 / SQRT3) + noise * c(w), rho.basis())
}

pub fn partial_transpose_b(m: &Matrix4c) -> Matrix4c {
    Matrix4c::from_fn(|i, j| m[(2 * (i / 2) + j % 2, 2 * (j / 2) + i % 2)])
}

fn min_eigenvalue(m: &Matrix4c) -> f64 {
    let h = (m + m.adjoint()) * c(0.5);
    h.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn ppt_entangled(rho: &DensityMatrix4) -> Verdict {
    let margin = -min_eigenvalue(&partial_transpose_b(rho.entries()));
    Verdict { flag: margin > PPT_TOL, margin }
}

pub fn general_steering(rho: &DensityMatrix4, direction: Direction) -> Verdict {
    ppt_entangled(&steering_map(rho, direction))
}

/// X-state entanglement: `|rho23|^2 > rho11 rho44` or `|rho14|^2 > rho22 rho33`.
pub fn xstate_entangled(x: &XState) -> Verdict {
    let outer = x.rho23.norm_sqr() - x.rho11 * x.rho44;
    let inner = x.rho14.norm_sqr() - x.rho22 * x.rho33;
    Verdict::strict(outer.max(inner))
}

/// Closed-form steering verdicts `(A to B, B to A)`.
pub fn xstate_steering(x: &XState) -> Result<(Verdict, Verdict)> {
    let (r23, r14) = (x.rho23.norm(), x.rho14.norm());
    if r14 > REGIME_RATIO * r23.max(1e-15) {
        return Err(Error::Regime { rho14: r14, rho23: r23 });
    }
    let f = steering_factors(x);
    let lhs = x.rho23.norm_sqr();
    Ok((Verdict::strict(lhs - (f.f_a + f.f_b)), Verdict::strict(lhs - (f.f_a - f.f_b))))
}

/// CHSH violation through its two closed-form branches, combined with OR.
pub fn chsh_bell(x: &XState) -> Verdict {
    let lhs = x.rho23.norm_sqr();
    let first = lhs - 0.125;
    let z = 2.0 * (x.rho22 + x.rho33) - 1.0;
    let second = lhs - (0.25 - 0.25 * z * z);
    Verdict::strict(first.max(second))
}

/// Horodecki criterion: CHSH is violated iff the two largest eigenvalues of
/// `T^T T` sum to more than one. The margin is that sum minus one.
pub fn horodecki_bell(rho: &DensityMatrix4) -> Verdict {
    let m = rho.entries();
    let paulis = pauli_matrices();
    let t = Matrix3::from_fn(|i, j| {
        let op = paulis[i].kronecker(&paulis[j]);
        (m * op).trace().re
    });
    let u = t.transpose() * t;
    let mut ev: Vec<f64> = u.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    Verdict::strict(ev[0] + ev[1] - 1.0)
}

fn pauli_matrices() -> [nalgebra::Matrix2<Complex64>; 3] {
    let i = Complex64::new(0.0, 1.0);
    [
        nalgebra::Matrix2::new(c(0.0), c(1.0), c(1.0), c(0.0)),
        nalgebra::Matrix2::new(c(0.0), -i, i, c(0.0)),
        nalgebra::Matrix2::new(c(1.0), c(0.0), c(0.0), c(-1.0)),
    ]
}

pub fn eigen_populations(rho: &DensityMatrix4, eig: &EigenSystem) -> EigenPopulations {
    let e = basis_change(rho, Basis::Energy, eig);
    let d = e.populations();
    match eig.phase {
        crate::model::Phase::Weak => EigenPopulations { p00: d[0], p_minus: d[1], p_plus: d[2], p11: d[3] },
        crate::model::Phase::Strong => EigenPopulations { p_minus: d[0], p00: d[1], p11: d[2], p_plus: d[3] },
    }
}

/// Reconciles two verdicts for one criterion; `preferred` supplies the reported margin.
fn reconcile(name: &str, preferred: Verdict, general: Verdict) -> Result<Verdict> {
    if preferred.flag == general.flag {
        return Ok(preferred);
    }
    if preferred.margin.abs() <= AGREEMENT_TOL && general.margin.abs() <= AGREEMENT_TOL {
        return Ok(general);
    }
    Err(Error::PathDisagreement(format!(
        "{name}: closed form {:?} vs general {:?}",
        preferred, general
    )))
}

/// Full classification of a local-basis state.
///
/// With an eigensystem supplied, energy-basis input is accepted and the
/// eigen-populations are filled in.
pub fn classify(rho: &DensityMatrix4, context: Option<&EigenSystem>) -> Result<CorrelationReport> {
    let local = match (rho.basis(), context) {
        (Basis::Local, _) => rho.clone(),
        (Basis::Energy, Some(eig)) => basis_change(rho, Basis::Local, eig),
        (Basis::Energy, None) => {
            return Err(Error::InvalidState("energy-basis input needs an eigensystem".into()))
        }
    };
    let ppt = ppt_entangled(&local);
    let gen_ab = general_steering(&local, Direction::AtoB);
    let gen_ba = general_steering(&local, Direction::BtoA);
    let gen_bell = horodecki_bell(&local);

    let closed = extract_xstate(&local, X_TOL)
        .ok()
        .and_then(|x| xstate_steering(&x).ok().map(|s| (x, s)));

    let report = match closed {
        Some((x, (ab, ba))) => {
            reconcile("entanglement", xstate_entangled(&x), ppt)?;
            CorrelationReport {
                entangled: ppt,
                steer_a_to_b: reconcile("steering A->B", ab, gen_ab)?,
                steer_b_to_a: reconcile("steering B->A", ba, gen_ba)?,
                bell: reconcile("bell", chsh_bell(&x), gen_bell)?,
                eigen_populations: None,
                method: Method::Both,
            }
        }
        None => CorrelationReport {
            entangled: ppt,
            steer_a_to_b: gen_ab,
            steer_b_to_a: gen_ba,
            bell: gen_bell,
            eigen_populations: None,
            method: Method::GeneralPPT,
        },
    };
    let report = CorrelationReport {
        eigen_populations: context.map(|eig| eigen_populations(&local, eig)),
        ..report
    };
    if let Some(msg) = report.hierarchy_violation() {
        return Err(Error::HierarchyViolation(msg.into()));
    }
    Ok(report)
}

/// `w |psi-><psi-| + (1 - w) I/4` with the singlet `(|01> - |10>)/sqrt2`.
pub fn werner_state(w: f64) -> DensityMatrix4 {
    let mut m = Matrix4c::identity() * c(0.25 * (1.0 - w));
    m[(1, 1)] += c(0.5 * w);
    m[(2, 2)] += c(0.5 * w);
    m[(1, 2)] = c(-0.5 * w);
    m[(2, 1)] = c(-0.5 * w);
    DensityMatrix4::from_raw(m, Basis::Local)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn singlet() -> DensityMatrix4 {
        werner_state(1.0)
    }

    #[test]
    fn map_of_ground_product_state() {
        let rho = DensityMatrix4::diagonal([1.0, 0.0, 0.0, 0.0], Basis::Local).unwrap();
        let out = steering_map(&rho, Direction::AtoB);
        let w = depolarizing_weight();
        let want = [1.0 / SQRT3 + w / 2.0, 0.0, w / 2.0, 0.0];
        for k in 0..4 {
            assert_abs_diff_eq!(out.get(k, k).re, want[k], epsilon = 1e-15);
        }
        assert_abs_diff_eq!(out.entries().trace().re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn map_fixes_maximally_mixed() {
        let rho = DensityMatrix4::maximally_mixed(Basis::Local);
        for d in [Direction::AtoB, Direction::BtoA] {
            let out = steering_map(&rho, d);
            assert!((out.entries() - rho.entries()).camax() < 1e-15);
        }
    }

    #[test]
    fn map_rescales_werner_weight() {
        for w in [0.2, 0.6, 0.9] {
            for d in [Direction::AtoB, Direction::BtoA] {
                let out = steering_map(&werner_state(w), d);
                let want = werner_state(w / SQRT3);
                assert!((out.entries() - want.entries()).camax() < 1e-15);
            }
        }
    }

    #[test]
    fn singlet_partial_transpose() {
        let v = ppt_entangled(&singlet());
        assert_abs_diff_eq!(v.margin, 0.5, epsilon = 1e-12);
        assert!(v.flag);
    }

    #[test]
    fn werner_third_is_threshold() {
        assert_abs_diff_eq!(ppt_entangled(&werner_state(1.0 / 3.0)).margin, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn singlet_closed_form_steering() {
        let x = extract_xstate(&singlet(), X_TOL).unwrap();
        let f = steering_factors(&x);
        assert_abs_diff_eq!(f.f_a, (2.0 - SQRT3) / 8.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.f_b, 0.0, epsilon = 1e-15);
        let (ab, ba) = xstate_steering(&x).unwrap();
        assert_abs_diff_eq!(ab.margin, 0.25 - f.f_a, epsilon = 1e-15);
        assert!(ab.flag && ba.flag);
        assert!(chsh_bell(&x).flag);
    }

    #[test]
    fn not_x_rejected() {
        let amps = [Complex64::new(0.3, 0.1), c(0.5), Complex64::new(-0.2, 0.4), c(0.6)];
        let rho = DensityMatrix4::pure(amps, Basis::Local).unwrap();
        assert!(matches!(extract_xstate(&rho, X_TOL), Err(Error::NotXState(_))));
        let report = classify(&rho, None).unwrap();
        assert_eq!(report.method, Method::GeneralPPT);
    }

    #[test]
    fn maximally_mixed_is_classical() {
        let rho = DensityMatrix4::maximally_mixed(Basis::Local);
        let x = extract_xstate(&rho, X_TOL).unwrap();
        assert_eq!(x.rho11, 0.25);
        assert_eq!(x.rho23, c(0.0));
        let r = classify(&rho, None).unwrap();
        assert!(!r.entangled.flag && !r.steer_a_to_b.flag && !r.bell.flag);
    }

    #[test]
    fn regime_guard() {
        let x = XState { rho11: 0.3, rho22: 0.2, rho33: 0.2, rho44: 0.3, rho23: c(0.01), rho14: c(0.05) };
        assert!(matches!(xstate_steering(&x), Err(Error::Regime { .. })));
    }

    #[test]
    fn werner_classification() {
        let r = classify(&werner_state(0.65), None).unwrap();
        assert!(r.entangled.flag && r.steer_a_to_b.flag && r.steer_b_to_a.flag && !r.bell.flag);
        assert_eq!(r.method, Method::Both);
        let r = classify(&werner_state(0.3), None).unwrap();
        assert!(!r.entangled.flag && !r.steer_a_to_b.flag && !r.steer_b_to_a.flag && !r.bell.flag);
        let r = classify(&werner_state(0.5), None).unwrap();
        assert!(r.entangled.flag && !r.steer_a_to_b.flag);
        assert!(general_steering(&werner_state(0.6), Direction::AtoB).flag);
    }

    #[test]
    fn symmetric_factor_gives_equal_verdicts() {
        let x = XState { rho11: 0.5, rho22: 0.2, rho33: 0.2, rho44: 0.1, rho23: c(-0.15), rho14: c(0.0) };
        let (ab, ba) = xstate_steering(&x).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn planted_hierarchy_break_is_detected() {
        let report = CorrelationReport {
            entangled: Verdict { flag: true, margin: 0.1 },
            steer_a_to_b: Verdict { flag: false, margin: -0.1 },
            steer_b_to_a: Verdict { flag: true, margin: 0.1 },
            bell: Verdict { flag: true, margin: 0.1 },
            eigen_populations: None,
            method: Method::Both,
        };
        assert!(report.hierarchy_violation().is_some());
    }
}
