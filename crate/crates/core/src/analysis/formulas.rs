//! Closed-form threshold couplings and their asymptotic regimes.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::rates::Statistics;

/// Fixed parameters for the formula table. `mu_bar` is ignored for bosons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticInputs {
    pub statistics: Statistics,
    pub bar_eps: f64,
    #[serde(default)]
    pub delta_eps: f64,
    pub temperature: f64,
    #[serde(default)]
    pub mu_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticValue {
    pub name: String,
    pub value: f64,
    /// Regime in which the expression is meant to hold.
    pub regime: String,
}

impl AnalyticValue {
    fn new(name: &str, value: f64, regime: &str) -> Self {
        Self { name: name.into(), value, regime: regime.into() }
    }
}

pub fn kappa_ent(t: f64) -> f64 {
    2.0 * (1.0 + SQRT_2).ln() * t
}

pub fn bose_kappa_low(bar_eps: f64, t: f64) -> f64 {
    2.0 * bar_eps + (4.0_f64 / 3.0).ln() * t
}

pub fn bose_kappa_high(bar_eps: f64, t: f64) -> f64 {
    3.121 * t + 0.347 * bar_eps * bar_eps / t
}

pub fn bose_bell_low(bar_eps: f64, t: f64) -> f64 {
    2.0 * bar_eps + 2.0 * (1.0 / (SQRT_2 - 1.0)).ln() * t
}

/// Detuning above which B→A steering reaches into the weak-coupling phase.
pub fn detuning_b_to_a(bar_eps: f64) -> f64 {
    (4.0 * 3f64.sqrt() - 6.0) / 3.0 * bar_eps
}

pub fn fermi_kappa_resonant(t: f64) -> f64 {
    let s3 = 3f64.sqrt();
    2.0 * ((s3 + 2.0 * (3.0 + 3.0 * s3).sqrt()) / 3.0).acosh() * t
}

pub fn fermi_kappa_low(bar_eps: f64, mu_bar: f64, t: f64) -> f64 {
    2.0 * (bar_eps - mu_bar).abs() + (4.0_f64 / 3.0).ln() * t
}

pub fn fermi_bell_resonant(t: f64) -> f64 {
    2.0 * (3.0 + 2.0 * SQRT_2).ln() * t
}

pub fn fermi_bell_low(bar_eps: f64, mu_bar: f64, t: f64) -> f64 {
    2.0 * (bar_eps - mu_bar).abs() + 2.0 * (1.0 / (SQRT_2 - 1.0)).ln() * t
}

/// `(A→B, B→A)` thresholds split around the symmetric value `k0`.
/// `sign` is `+1` for bosons and `sgn(bar_eps - mu_bar)` for fermions.
pub fn directional_split(k0: f64, delta_eps: f64, t: f64, sign: f64) -> (f64, f64) {
    let d = sign * 2.0 * delta_eps * t / k0;
    (k0 + d, k0 - d)
}

/// Every closed form applicable to `inp`, tagged with its regime.
pub fn analytic_thresholds(inp: &AnalyticInputs) -> Vec<AnalyticValue> {
    let (e, t, de) = (inp.bar_eps, inp.temperature, inp.delta_eps);
    let mut out = vec![AnalyticValue::new("kappa_ent", kappa_ent(t), "equilibrium")];
    match inp.statistics {
        Statistics::Bose => {
            let low = bose_kappa_low(e, t);
            let (ab, ba) = directional_split(low, de, t, 1.0);
            out.extend([
                AnalyticValue::new("kappa_steer_low", low, "low_t"),
                AnalyticValue::new("kappa_steer_high", bose_kappa_high(e, t), "high_t"),
                AnalyticValue::new("kappa_bell_low", bose_bell_low(e, t), "low_t"),
                AnalyticValue::new("kappa_a_to_b_low", ab, "low_t_small_detuning"),
                AnalyticValue::new("kappa_b_to_a_low", ba, "low_t_small_detuning"),
                AnalyticValue::new("delta_eps_b_to_a", detuning_b_to_a(e), "low_t"),
            ]);
        }
        Statistics::Fermi => {
            let mu = inp.mu_bar;
            let low = fermi_kappa_low(e, mu, t);
            let sign = if e > mu {
                1.0
            } else if e < mu {
                -1.0
            } else {
                0.0
            };
            let (ab, ba) = directional_split(low, de, t, sign);
            out.extend([
                AnalyticValue::new("kappa_steer_resonant", fermi_kappa_resonant(t), "resonant"),
                AnalyticValue::new("kappa_steer_low", low, "off_resonant_low_t"),
                AnalyticValue::new("kappa_bell_resonant", fermi_bell_resonant(t), "resonant"),
                AnalyticValue::new("kappa_bell_low", fermi_bell_low(e, mu, t), "off_resonant_low_t"),
                AnalyticValue::new("kappa_a_to_b_low", ab, "off_resonant_low_t_small_detuning"),
                AnalyticValue::new("kappa_b_to_a_low", ba, "off_resonant_low_t_small_detuning"),
                AnalyticValue::new("delta_eps_b_to_a", detuning_b_to_a(e), "off_resonant_low_t"),
            ]);
        }
    }
    out
}
