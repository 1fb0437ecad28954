//! 6x6 Bloch-Redfield generators acting on
//! `(rho_gg, rho_e1e1, rho_e2e2, rho_e3e3, rho_e1e2, rho_e2e1)`.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    c, derive_params, eigensystem, Basis, DensityMatrix4, DerivedParams, EigenSystem, Matrix4c,
    Phase, SystemParams,
};
use crate::rates::{rate_set, RateSet, ReservoirSpec, Statistics};

pub type Matrix6c = SMatrix<Complex64, 6, 6>;
pub type Vector6c = SVector<Complex64, 6>;

/// Entries of the energy-basis density matrix retained by the generator.
pub const RETAINED: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (3, 3), (1, 2), (2, 1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Setup {
    WeakBose,
    WeakFermi,
    StrongBose,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reservoir {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector6(pub Vector6c);

impl StateVector6 {
    /// Reads the retained entries of an energy-basis state. Entries outside the
    /// retained set are dropped; a warning is logged if any exceed `1e-12`.
    pub fn from_energy(rho: &DensityMatrix4) -> Result<Self> {
        if rho.basis() != Basis::Energy {
            return Err(Error::InvalidState("expected an energy-basis state".into()));
        }
        let dropped = dropped_magnitude(rho.entries());
        if dropped > 1e-12 {
            log::warn!("projecting out entries of magnitude up to {dropped:e} not carried by the generator");
        }
        Ok(Self(Vector6c::from_fn(|k, _| {
            let (i, j) = RETAINED[k];
            rho.get(i, j)
        })))
    }

    pub fn populations(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|k| self.0[k].re)
    }

    pub fn coherence(&self) -> Complex64 {
        self.0[4]
    }

    pub fn population_sum(&self) -> Complex64 {
        self.0[0] + self.0[1] + self.0[2] + self.0[3]
    }

    /// Largest violation of real populations and conjugate-paired coherences.
    pub fn hermiticity_defect(&self) -> f64 {
        let pops = (0..4).map(|k| self.0[k].im.abs()).fold(0.0, f64::max);
        pops.max((self.0[5] - self.0[4].conj()).norm())
    }

    /// Embeds into a 4x4 energy-basis matrix with every other entry zero.
    pub fn to_matrix(&self) -> Matrix4c {
        let mut m = Matrix4c::zeros();
        for (k, &(i, j)) in RETAINED.iter().enumerate() {
            m[(i, j)] = self.0[k];
        }
        m
    }
}

fn dropped_magnitude(m: &Matrix4c) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if !RETAINED.contains(&(i, j)) {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    total: Matrix6c,
    coherent_part: Matrix6c,
    res_a_part: Matrix6c,
    res_b_part: Matrix6c,
    setup: Setup,
    params: SystemParams,
    derived: DerivedParams,
    eigen: EigenSystem,
    reservoirs: (ReservoirSpec, ReservoirSpec),
    rates: RateSet,
}

impl Generator {
    pub fn total(&self) -> &Matrix6c {
        &self.total
    }

    pub fn coherent_part(&self) -> &Matrix6c {
        &self.coherent_part
    }

    pub fn reservoir_part(&self, which: Reservoir) -> &Matrix6c {
        match which {
            Reservoir::A => &self.res_a_part,
            Reservoir::B => &self.res_b_part,
        }
    }

    pub fn setup(&self) -> Setup {
        self.setup
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn derived(&self) -> &DerivedParams {
        &self.derived
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eigen
    }

    pub fn reservoirs(&self) -> (&ReservoirSpec, &ReservoirSpec) {
        (&self.reservoirs.0, &self.reservoirs.1)
    }

    pub fn rates(&self) -> &RateSet {
        &self.rates
    }

    pub fn is_equilibrium(&self) -> bool {
        self.reservoirs.0 == self.reservoirs.1
    }

    /// Largest population decay rate over the frequency of the retained coherence.
    /// The weak-coupling description is only trustworthy well below one.
    pub fn coupling_ratio(&self) -> f64 {
        let rate = (0..4).map(|k| self.total[(k, k)].re.abs()).fold(0.0, f64::max);
        let e = self.eigen.energies;
        rate / (e[2] - e[1]).abs()
    }

    pub fn apply(&self, v: &StateVector6) -> StateVector6 {
        StateVector6(self.total * v.0)
    }

    /// Same system with both dissipators switched off.
    pub fn coherent_only(&self) -> Generator {
        Generator {
            total: self.coherent_part,
            res_a_part: Matrix6c::zeros(),
            res_b_part: Matrix6c::zeros(),
            ..self.clone()
        }
    }
}

pub fn apply_generator(g: &Generator, v: &StateVector6) -> StateVector6 {
    g.apply(v)
}

pub fn reservoir_part(g: &Generator, which: Reservoir) -> Matrix6c {
    *g.reservoir_part(which)
}

pub fn build_generator(p: &SystemParams, ra: &ReservoirSpec, rb: &ReservoirSpec) -> Result<Generator> {
    let derived = derive_params(p)?;
    let rates = rate_set(p, ra, rb)?;
    let setup = match (derived.phase, rates.statistics) {
        (Phase::Weak, Statistics::Bose) => Setup::WeakBose,
        (Phase::Weak, Statistics::Fermi) => Setup::WeakFermi,
        (Phase::Strong, Statistics::Bose) => Setup::StrongBose,
        (Phase::Strong, Statistics::Fermi) => {
            return Err(Error::Unsupported(
                "fermionic reservoirs are only modelled in the weak-coupling phase".into(),
            ))
        }
    };
    let eigen = eigensystem(p)?;
    let w = derived.coherence_frequency();
    let mut coherent_part = Matrix6c::zeros();
    coherent_part[(4, 4)] = Complex64::new(0.0, w);
    coherent_part[(5, 5)] = Complex64::new(0.0, -w);

    let total = coherent_part + printed_dissipator(setup, &rates);
    let res_a_part = reservoir_dissipator(setup, &rates, Reservoir::A);
    let res_b_part = reservoir_dissipator(setup, &rates, Reservoir::B);

    Ok(Generator {
        total,
        coherent_part,
        res_a_part,
        res_b_part,
        setup,
        params: *p,
        derived,
        eigen,
        reservoirs: (*ra, *rb),
        rates,
    })
}

fn from_rows(rows: [[f64; 6]; 6]) -> Matrix6c {
    Matrix6c::from_fn(|i, j| c(rows[i][j]))
}

/// Dissipative part of the total generator, entry by entry as in the appendix matrices.
fn printed_dissipator(setup: Setup, r: &RateSet) -> Matrix6c {
    let (p, q, g) = (r.p, r.q, r.gamma);
    let (sa, sb, ta, tb) = (r.s_a, r.s_b, r.t_a, r.t_b);
    let gs = g * r.sin_theta;
    let rows = match setup {
        Setup::WeakBose => {
            let dc = -2.0 * (g + p + q);
            [
                [-2.0 * (p + q), 2.0 * (g + q), 2.0 * (g + p), 0.0, sb - sa, sb - sa],
                [2.0 * q, -2.0 * (g + p + q), 0.0, 2.0 * (g + p), ta - tb, ta - tb],
                [2.0 * p, 0.0, -2.0 * (g + p + q), 2.0 * (g + q), tb - ta, tb - ta],
                [0.0, 2.0 * p, 2.0 * q, -2.0 * (2.0 * g + p + q), sa - sb, sa - sb],
                [sb - sa, tb - ta, ta - tb, sa - sb, dc, 0.0],
                [sb - sa, tb - ta, ta - tb, sa - sb, 0.0, dc],
            ]
        }
        Setup::WeakFermi => {
            let d = sb - sa;
            [
                [-2.0 * (p + q), 2.0 * (g - q), 2.0 * (g - p), 0.0, sa - sb, sa - sb],
                [2.0 * q, -2.0 * (g + p - q), 0.0, 2.0 * (g - p), sb - sa, sb - sa],
                [2.0 * p, 0.0, -2.0 * (g - p + q), 2.0 * (g - q), sb - sa, sb - sa],
                [0.0, 2.0 * p, 2.0 * q, -2.0 * (2.0 * g - p - q), sa - sb, sa - sb],
                [d, d, d, d, -2.0 * g, 0.0],
                [d, d, d, d, 0.0, -2.0 * g],
            ]
        }
        Setup::StrongBose => {
            let dc = -2.0 * (g + p + q);
            let col = [-sa - sb - 2.0 * gs, ta + tb + gs, -ta - tb + gs, sa + sb];
            let row = [-sa - sb, -ta - tb + gs, ta + tb + gs, sa + sb + 2.0 * gs];
            [
                [-2.0 * (p + q), 2.0 * (g + q), 2.0 * (g + p), 0.0, col[0], col[0]],
                [2.0 * q, -2.0 * (g + p + q), 0.0, 2.0 * (g + p), col[1], col[1]],
                [2.0 * p, 0.0, -2.0 * (g + p + q), 2.0 * (g + q), col[2], col[2]],
                [0.0, 2.0 * p, 2.0 * q, -2.0 * (2.0 * g + p + q), col[3], col[3]],
                [row[0], row[1], row[2], row[3], dc, 0.0],
                [row[0], row[1], row[2], row[3], 0.0, dc],
            ]
        }
    };
    from_rows(rows)
}

/// Dissipator generated by one reservoir alone.
///
/// Spontaneous terms use the weights `spont_plus_j`, `spont_minus_j` of the
/// rate set. The coherence couplings change sign for reservoir B in the weak
/// phase because `psi-` carries the `-sin` amplitude on `|10>`.
fn reservoir_dissipator(setup: Setup, r: &RateSet, which: Reservoir) -> Matrix6c {
    let (wp, wm, pj, qj, sj, tj) = match which {
        Reservoir::A => (r.spont_plus_a, r.spont_minus_a, r.p_a, r.q_a, r.s_a, r.t_a),
        Reservoir::B => (r.spont_plus_b, r.spont_minus_b, r.p_b, r.q_b, r.s_b, r.t_b),
    };
    let sign = match (setup, which) {
        (Setup::StrongBose, _) | (_, Reservoir::A) => 1.0,
        _ => -1.0,
    };
    let h = r.gamma * r.sin_theta;
    let fermi = setup == Setup::WeakFermi;
    // emission weights: spontaneous plus (bose) or minus (fermi) stimulated
    let (ep, em) = if fermi { (wp - pj, wm - qj) } else { (wp + pj, wm + qj) };

    let pops = [
        [-2.0 * (pj + qj), 2.0 * em, 2.0 * ep, 0.0],
        [2.0 * qj, -2.0 * (em + pj), 0.0, 2.0 * ep],
        [2.0 * pj, 0.0, -2.0 * (ep + qj), 2.0 * em],
        [0.0, 2.0 * pj, 2.0 * qj, -2.0 * (ep + em)],
    ];
    let (col, row, decay) = if fermi {
        (
            [sj - h, -sj + 0.5 * h, -sj + 0.5 * h, sj],
            [-sj, -sj + 0.5 * h, -sj + 0.5 * h, -sj + h],
            -(wp + wm),
        )
    } else {
        (
            [-sj - h, tj + 0.5 * h, -tj + 0.5 * h, sj],
            [-sj, -tj + 0.5 * h, tj + 0.5 * h, sj + h],
            -(wp + wm) - 2.0 * (pj + qj),
        )
    };

    let mut m = Matrix6c::zeros();
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = c(pops[i][j]);
        }
        m[(i, 4)] = c(sign * col[i]);
        m[(i, 5)] = c(sign * col[i]);
        m[(4, i)] = c(sign * row[i]);
        m[(5, i)] = c(sign * row[i]);
    }
    m[(4, 4)] = c(decay);
    m[(5, 5)] = c(decay);
    m
}
