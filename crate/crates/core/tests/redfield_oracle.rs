//! Generators against a brute-force secular Bloch-Redfield tensor built from
//! Pauli operators, with sigma_x couplings to each reservoir.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use proptest::prelude::*;

use steerlab::generator::{build_generator, Generator, Reservoir};
use steerlab::model::{eigensystem, SystemParams};
use steerlab::rates::ReservoirSpec;

type C = Complex64;

fn kron(a: &Matrix2<C>, b: &Matrix2<C>) -> Matrix4<C> {
    Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

fn paulis() -> (Matrix2<C>, Matrix2<C>, Matrix2<C>, Matrix2<C>) {
    let r = |x: f64| C::new(x, 0.0);
    let id = Matrix2::identity();
    let sx = Matrix2::new(r(0.0), r(1.0), r(1.0), r(0.0));
    let sy = Matrix2::new(r(0.0), C::new(0.0, -1.0), C::new(0.0, 1.0), r(0.0));
    // |0> is the qubit ground state
    let sz = Matrix2::new(r(-1.0), r(0.0), r(0.0), r(1.0));
    (id, sx, sy, sz)
}

fn hamiltonian(p: &SystemParams) -> Matrix4<C> {
    let (id, sx, sy, sz) = paulis();
    let h = |x: f64| C::new(x, 0.0);
    kron(&sz, &id) * h(p.eps_a / 2.0) + kron(&id, &sz) * h(p.eps_b / 2.0)
        + (kron(&sx, &sx) + kron(&sy, &sy)) * h(p.kappa / 4.0)
}

fn rate(w: f64, r: &ReservoirSpec, gamma: f64) -> f64 {
    if w.abs() < 1e-12 {
        return 0.0;
    }
    let e = w.abs();
    let n = match r.statistics {
        steerlab::Statistics::Bose => 1.0 / (((e - r.mu) / r.temperature).exp() - 1.0),
        steerlab::Statistics::Fermi => 1.0 / (((e - r.mu) / r.temperature).exp() + 1.0),
    };
    let emit = match r.statistics {
        steerlab::Statistics::Bose => 1.0 + n,
        steerlab::Statistics::Fermi => 1.0 - n,
    };
    gamma * if w > 0.0 { emit } else { n }
}

const RETAINED: [usize; 6] = [0, 5, 10, 15, 6, 9];

/// Dissipator of one reservoir restricted to the retained entries.
fn tensor_part(p: &SystemParams, r: &ReservoirSpec, which: Reservoir) -> DMatrix<C> {
    let e = eigensystem(p).unwrap();
    let h = hamiltonian(p);
    let v = e.vectors;
    for k in 0..4 {
        let col = v.column(k);
        let resid = (h * col - col * C::new(e.energies[k], 0.0)).camax();
        assert!(resid < 1e-11, "eigenpair {k} residual {resid}");
    }
    let (id, sx, _, _) = paulis();
    let op = match which {
        Reservoir::A => kron(&sx, &id),
        Reservoir::B => kron(&id, &sx),
    };
    let a = v.adjoint() * op * v;
    let en = e.energies;
    let g = |w: f64| rate(w, r, p.gamma);
    let mut l = DMatrix::<C>::zeros(16, 16);
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for m in 0..4 {
                    let mut val = a[(i, k)] * a[(m, j)] * (g(en[m] - en[j]) + g(en[k] - en[i]));
                    if j == m {
                        for n in 0..4 {
                            val -= a[(i, n)] * a[(n, k)] * g(en[k] - en[n]);
                        }
                    }
                    if i == k {
                        for n in 0..4 {
                            val -= a[(m, n)] * a[(n, j)] * g(en[m] - en[n]);
                        }
                    }
                    l[(i * 4 + j, k * 4 + m)] += val;
                }
            }
        }
    }
    DMatrix::from_fn(6, 6, |i, j| l[(RETAINED[i], RETAINED[j])])
}

fn coherent(p: &SystemParams) -> DMatrix<C> {
    let en = eigensystem(p).unwrap().energies;
    DMatrix::from_fn(6, 6, |i, j| {
        if i != j {
            return C::new(0.0, 0.0);
        }
        let (a, b) = (RETAINED[i] / 4, RETAINED[i] % 4);
        C::new(0.0, -(en[a] - en[b]))
    })
}

fn max_diff(g: &nalgebra::SMatrix<C, 6, 6>, o: &DMatrix<C>) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..6 {
        for j in 0..6 {
            m = m.max((g[(i, j)] - o[(i, j)]).norm());
        }
    }
    m
}

fn check(p: SystemParams, ra: ReservoirSpec, rb: ReservoirSpec) -> Generator {
    let g = build_generator(&p, &ra, &rb).unwrap();
    let oa = tensor_part(&p, &ra, Reservoir::A);
    let ob = tensor_part(&p, &rb, Reservoir::B);
    let tol = 1e-13 * (1.0 + p.gamma * 1e3);
    assert!(max_diff(g.reservoir_part(Reservoir::A), &oa) < tol, "A part: {p:?} {ra:?}");
    assert!(max_diff(g.reservoir_part(Reservoir::B), &ob) < tol, "B part: {p:?} {rb:?}");
    let total = coherent(&p) + oa + ob;
    assert!(max_diff(g.total(), &total) < tol, "total: {p:?}");
    g
}

#[test]
fn weak_bose_detuned() {
    let p = SystemParams::new(1.5, 0.5, 1.0, 0.01).unwrap();
    check(p, ReservoirSpec::bose(0.5).unwrap(), ReservoirSpec::bose(0.3).unwrap());
}

#[test]
fn strong_bose_detuned() {
    let p = SystemParams::new(1.8, 0.2, 3.0, 0.01).unwrap();
    check(p, ReservoirSpec::bose(0.4).unwrap(), ReservoirSpec::bose(0.7).unwrap());
}

#[test]
fn weak_fermi_detuned() {
    let p = SystemParams::new(1.5, 0.5, 0.6, 0.01).unwrap();
    check(p, ReservoirSpec::fermi(0.15, 1.3).unwrap(), ReservoirSpec::fermi(0.15, 0.7).unwrap());
}

#[test]
fn weak_fermi_mixed_temperatures() {
    let p = SystemParams::new(1.2, 0.9, 0.3, 0.01).unwrap();
    check(p, ReservoirSpec::fermi(0.4, 0.2).unwrap(), ReservoirSpec::fermi(0.25, 1.6).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bose_matches_tensor(
        bar in 0.5f64..2.0,
        frac in 0.0f64..0.9,
        kfrac in 0.05f64..3.0,
        ta in 0.05f64..3.0,
        tb in 0.05f64..3.0,
    ) {
        let de = frac * bar;
        let (ea, eb) = (bar + de / 2.0, bar - de / 2.0);
        let kappa = kfrac * 2.0 * (ea * eb).sqrt();
        prop_assume!((kfrac - 1.0).abs() > 1e-3);
        let p = SystemParams::new(ea, eb, kappa, 0.01 * eb).unwrap();
        check(p, ReservoirSpec::bose(ta).unwrap(), ReservoirSpec::bose(tb).unwrap());
    }

    #[test]
    fn fermi_matches_tensor(
        bar in 0.5f64..2.0,
        frac in 0.0f64..0.9,
        kfrac in 0.05f64..0.99,
        t in 0.05f64..2.0,
        mua in -1.0f64..3.0,
        mub in -1.0f64..3.0,
    ) {
        let de = frac * bar;
        let (ea, eb) = (bar + de / 2.0, bar - de / 2.0);
        let kappa = kfrac * 2.0 * (ea * eb).sqrt();
        let p = SystemParams::new(ea, eb, kappa, 0.01 * eb).unwrap();
        check(p, ReservoirSpec::fermi(t, mua).unwrap(), ReservoirSpec::fermi(t, mub).unwrap());
    }
}
