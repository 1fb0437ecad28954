//! Reservoir occupations and the Redfield rate parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_params, DerivedParams, Phase, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Bose,
    Fermi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirSpec {
    pub statistics: Statistics,
    pub temperature: f64,
    #[serde(default)]
    pub mu: f64,
}

impl ReservoirSpec {
    pub fn new(statistics: Statistics, temperature: f64, mu: f64) -> Result<Self> {
        let r = Self { statistics, temperature, mu };
        r.validate()?;
        Ok(r)
    }

    pub fn bose(temperature: f64) -> Result<Self> {
        Self::new(Statistics::Bose, temperature, 0.0)
    }

    pub fn fermi(temperature: f64, mu: f64) -> Result<Self> {
        Self::new(Statistics::Fermi, temperature, mu)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature = {} must be finite and > 0",
                self.temperature
            )));
        }
        if !self.mu.is_finite() {
            return Err(Error::InvalidParameter("chemical potential must be finite".into()));
        }
        if self.statistics == Statistics::Bose && self.mu != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "bose reservoirs carry mu = 0, got {}",
                self.mu
            )));
        }
        Ok(())
    }
}

/// Mean occupation of reservoir mode at energy `eps`.
pub fn occupation(r: &ReservoirSpec, eps: f64) -> Result<f64> {
    let x = (eps - r.mu) / r.temperature;
    match r.statistics {
        Statistics::Bose => {
            if eps <= 1e-9 * r.temperature || eps <= r.mu {
                return Err(Error::BoseDivergence { eps, temperature: r.temperature });
            }
            Ok(1.0 / x.exp_m1())
        }
        Statistics::Fermi => {
            if x > 0.0 {
                let e = (-x).exp();
                Ok(e / (1.0 + e))
            } else {
                Ok(1.0 / (x.exp() + 1.0))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionEnergies {
    pub eps_minus: f64,
    pub eps_plus: f64,
}

pub fn transition_energies(d: &DerivedParams) -> TransitionEnergies {
    let eps_minus = match d.phase {
        Phase::Weak => d.bar_eps - d.omega,
        Phase::Strong => d.omega - d.bar_eps,
    };
    TransitionEnergies { eps_minus, eps_plus: d.bar_eps + d.omega }
}

/// Rate parameters of the generator together with their per-reservoir split.
///
/// `spont_*` are the spontaneous-emission weights attributed to each reservoir at
/// the two transition energies; they sum to `gamma` at each energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    pub p: f64,
    pub q: f64,
    pub s_a: f64,
    pub s_b: f64,
    pub t_a: f64,
    pub t_b: f64,
    pub p_a: f64,
    pub p_b: f64,
    pub q_a: f64,
    pub q_b: f64,
    pub spont_plus_a: f64,
    pub spont_plus_b: f64,
    pub spont_minus_a: f64,
    pub spont_minus_b: f64,
    pub gamma: f64,
    pub sin_theta: f64,
    pub statistics: Statistics,
}

pub fn rate_set(p: &SystemParams, ra: &ReservoirSpec, rb: &ReservoirSpec) -> Result<RateSet> {
    ra.validate()?;
    rb.validate()?;
    if ra.statistics != rb.statistics {
        return Err(Error::MixedStatistics);
    }
    let d = derive_params(p)?;
    let e = transition_energies(&d);
    let g = p.gamma;
    let cos2 = (0.5 * d.theta).cos().powi(2);
    let sin2 = (0.5 * d.theta).sin().powi(2);
    let sin_theta = d.theta.sin();

    let na_plus = occupation(ra, e.eps_plus)?;
    let na_minus = occupation(ra, e.eps_minus)?;
    let nb_plus = occupation(rb, e.eps_plus)?;
    let nb_minus = occupation(rb, e.eps_minus)?;

    let p_a = g * cos2 * na_plus;
    let p_b = g * sin2 * nb_plus;
    let q_a = g * sin2 * na_minus;
    let q_b = g * cos2 * nb_minus;
    let half = 0.5 * g * sin_theta;

    Ok(RateSet {
        p: p_a + p_b,
        q: q_a + q_b,
        s_a: half * (na_plus + na_minus),
        s_b: half * (nb_plus + nb_minus),
        t_a: half * (na_plus - na_minus),
        t_b: half * (nb_plus - nb_minus),
        p_a,
        p_b,
        q_a,
        q_b,
        spont_plus_a: g * cos2,
        spont_plus_b: g * sin2,
        spont_minus_a: g * sin2,
        spont_minus_b: g * cos2,
        gamma: g,
        sin_theta,
        statistics: ra.statistics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn occupation_values() {
        let f = ReservoirSpec::fermi(0.3, 0.7).unwrap();
        assert_eq!(occupation(&f, 0.7).unwrap(), 0.5);
        let b = ReservoirSpec::bose(1.0).unwrap();
        assert_abs_diff_eq!(occupation(&b, 1.0).unwrap(), 0.5819767068693263, epsilon = 1e-15);
        let b = ReservoirSpec::bose(0.5).unwrap();
        assert_abs_diff_eq!(occupation(&b, 1.0).unwrap(), 0.15651764274966565, epsilon = 1e-15);
    }

    #[test]
    fn fermi_extremes_stay_finite() {
        let f = ReservoirSpec::fermi(0.01, 0.0).unwrap();
        assert_eq!(occupation(&f, 100.0).unwrap(), 0.0);
        assert_eq!(occupation(&f, -100.0).unwrap(), 1.0);
    }

    #[test]
    fn bose_guard_and_asymptote() {
        let b = ReservoirSpec::bose(1.0).unwrap();
        assert!(matches!(occupation(&b, 1e-10), Err(Error::BoseDivergence { .. })));
        assert!(occupation(&b, -1.0).is_err());
        for eps in [1e-3, 1e-4, 1e-6] {
            let n = occupation(&b, eps).unwrap();
            assert_relative_eq!(n, 1.0 / eps, max_relative = 0.01);
        }
    }

    #[test]
    fn reservoir_validation() {
        assert!(ReservoirSpec::new(Statistics::Bose, 1.0, 0.2).is_err());
        assert!(ReservoirSpec::bose(0.0).is_err());
        assert!(ReservoirSpec::fermi(-1.0, 0.0).is_err());
    }

    fn derived(eps_a: f64, eps_b: f64, kappa: f64) -> DerivedParams {
        derive_params(&SystemParams::new(eps_a, eps_b, kappa, 0.01).unwrap()).unwrap()
    }

    #[test]
    fn transition_energy_examples() {
        let e = transition_energies(&derived(1.0, 1.0, 1.0));
        assert_abs_diff_eq!(e.eps_minus, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e.eps_plus, 1.5, epsilon = 1e-15);
        let e = transition_energies(&derived(1.0, 1.0, 3.0));
        assert_abs_diff_eq!(e.eps_minus, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e.eps_plus, 2.5, epsilon = 1e-15);
        let e = transition_energies(&derived(1.0, 1.0, 1e-9));
        assert_abs_diff_eq!(e.eps_minus, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(e.eps_plus, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn mixed_statistics_rejected() {
        let p = SystemParams::new(1.0, 1.0, 1.0, 0.01).unwrap();
        let ra = ReservoirSpec::bose(0.5).unwrap();
        let rb = ReservoirSpec::fermi(0.5, 0.0).unwrap();
        assert_eq!(rate_set(&p, &ra, &rb), Err(Error::MixedStatistics));
    }

    #[test]
    fn equilibrium_rates_coincide() {
        let p = SystemParams::new(1.3, 0.9, 0.8, 0.01).unwrap();
        let r = ReservoirSpec::bose(0.4).unwrap();
        let rs = rate_set(&p, &r, &r).unwrap();
        assert_eq!(rs.s_a, rs.s_b);
        assert_eq!(rs.t_a, rs.t_b);
    }

    #[test]
    fn symmetric_qubits_average_occupations() {
        let p = SystemParams::new(1.0, 1.0, 0.8, 0.01).unwrap();
        let ra = ReservoirSpec::bose(0.4).unwrap();
        let rb = ReservoirSpec::bose(0.7).unwrap();
        let rs = rate_set(&p, &ra, &rb).unwrap();
        let n = |r: &ReservoirSpec, e: f64| occupation(r, e).unwrap();
        let want_p = 0.01 * (n(&ra, 1.4) + n(&rb, 1.4)) / 2.0;
        let want_q = 0.01 * (n(&ra, 0.6) + n(&rb, 0.6)) / 2.0;
        assert_relative_eq!(rs.p, want_p, max_relative = 1e-14);
        assert_relative_eq!(rs.q, want_q, max_relative = 1e-14);
    }

    #[test]
    fn regression_fixture() {
        let p = SystemParams::new(1.5, 0.5, 1.0, 0.01).unwrap();
        let rs = rate_set(&p, &ReservoirSpec::bose(0.5).unwrap(), &ReservoirSpec::bose(0.3).unwrap()).unwrap();
        let want = [
            (rs.p, 0.0002953573597397782),
            (rs.q, 0.006997380632259103),
            (rs.s_a, 0.004559661620001576),
            (rs.s_b, 0.0021487182063038572),
            (rs.t_a, -0.004319092140231751),
            (rs.t_b, -0.0021247484003194196),
        ];
        for (got, w) in want {
            assert_relative_eq!(got, w, max_relative = 1e-12);
        }
    }

    #[test]
    fn fermi_rates_bounded() {
        let p = SystemParams::new(1.5, 0.5, 0.6, 0.01).unwrap();
        let rs = rate_set(&p, &ReservoirSpec::fermi(0.15, 2.0).unwrap(), &ReservoirSpec::fermi(0.15, -1.0).unwrap()).unwrap();
        for v in [rs.p_a, rs.p_b, rs.q_a, rs.q_b] {
            assert!((0.0..=rs.gamma).contains(&v));
        }
    }
}
