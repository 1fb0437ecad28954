use serde::{Deserialize, Serialize};

use crate::correlations::{classify, CorrelationReport};
use crate::error::Result;
use crate::generator::{build_generator, Generator};
use crate::model::SystemParams;
use crate::rates::{ReservoirSpec, Statistics};
use crate::steady::{steady_state, SteadyResult};
use crate::transport::{currents, TransportReport};

/// Quantities a sweep axis can drive. Biases are `T_B - T_A` and `mu_B - mu_A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Kappa,
    Tbar,
    MuBar,
    DeltaT,
    DeltaMu,
    #[serde(rename = "t_a")]
    TA,
    #[serde(rename = "t_b")]
    TB,
    MuA,
    MuB,
}

/// Everything needed to evaluate one steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    #[serde(flatten)]
    pub params: SystemParams,
    pub statistics: Statistics,
    pub t_a: f64,
    pub t_b: f64,
    #[serde(default)]
    pub mu_a: f64,
    #[serde(default)]
    pub mu_b: f64,
}

impl OperatingPoint {
    pub fn bose(params: SystemParams, t_a: f64, t_b: f64) -> Self {
        Self { params, statistics: Statistics::Bose, t_a, t_b, mu_a: 0.0, mu_b: 0.0 }
    }

    pub fn fermi(params: SystemParams, t: f64, mu_a: f64, mu_b: f64) -> Self {
        Self { params, statistics: Statistics::Fermi, t_a: t, t_b: t, mu_a, mu_b }
    }

    pub fn reservoirs(&self) -> Result<(ReservoirSpec, ReservoirSpec)> {
        Ok((
            ReservoirSpec::new(self.statistics, self.t_a, self.mu_a)?,
            ReservoirSpec::new(self.statistics, self.t_b, self.mu_b)?,
        ))
    }

    pub fn generator(&self) -> Result<Generator> {
        let (ra, rb) = self.reservoirs()?;
        build_generator(&self.params, &ra, &rb)
    }

    pub fn t_bar(&self) -> f64 {
        0.5 * (self.t_a + self.t_b)
    }

    pub fn delta_t(&self) -> f64 {
        self.t_b - self.t_a
    }

    pub fn mu_bar(&self) -> f64 {
        0.5 * (self.mu_a + self.mu_b)
    }

    pub fn delta_mu(&self) -> f64 {
        self.mu_b - self.mu_a
    }

    pub fn get(&self, axis: Axis) -> f64 {
        match axis {
            Axis::Kappa => self.params.kappa,
            Axis::Tbar => self.t_bar(),
            Axis::MuBar => self.mu_bar(),
            Axis::DeltaT => self.delta_t(),
            Axis::DeltaMu => self.delta_mu(),
            Axis::TA => self.t_a,
            Axis::TB => self.t_b,
            Axis::MuA => self.mu_a,
            Axis::MuB => self.mu_b,
        }
    }

    /// Copy with `axis` set to `value`; mean/bias axes keep their partner fixed.
    pub fn with(&self, axis: Axis, value: f64) -> Self {
        let mut o = *self;
        match axis {
            Axis::Kappa => o.params.kappa = value,
            Axis::Tbar => {
                let d = self.delta_t();
                o.t_a = value - 0.5 * d;
                o.t_b = value + 0.5 * d;
            }
            Axis::DeltaT => {
                let m = self.t_bar();
                o.t_a = m - 0.5 * value;
                o.t_b = m + 0.5 * value;
            }
            Axis::MuBar => {
                let d = self.delta_mu();
                o.mu_a = value - 0.5 * d;
                o.mu_b = value + 0.5 * d;
            }
            Axis::DeltaMu => {
                let m = self.mu_bar();
                o.mu_a = m - 0.5 * value;
                o.mu_b = m + 0.5 * value;
            }
            Axis::TA => o.t_a = value,
            Axis::TB => o.t_b = value,
            Axis::MuA => o.mu_a = value,
            Axis::MuB => o.mu_b = value,
        }
        o
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointReport {
    pub steady: SteadyResult,
    pub correlations: CorrelationReport,
    pub transport: TransportReport,
}

/// Generator, steady state, classification and currents for one point.
pub fn evaluate(op: &OperatingPoint) -> Result<PointReport> {
    let g = op.generator()?;
    let steady = steady_state(&g)?;
    let correlations = classify(&steady.state_local, Some(g.eigen()))?;
    let transport = currents(&g, &steady)?;
    Ok(PointReport { steady, correlations, transport })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_bias_axes_commute() {
        let p = SystemParams::new(1.0, 1.0, 3.0, 0.01).unwrap();
        let op = OperatingPoint::bose(p, 0.5, 0.5);
        let a = op.with(Axis::Tbar, 0.7).with(Axis::DeltaT, 0.2);
        let b = op.with(Axis::DeltaT, 0.2).with(Axis::Tbar, 0.7);
        assert!((a.t_a - b.t_a).abs() < 1e-15 && (a.t_b - b.t_b).abs() < 1e-15);
        assert!((a.t_a - 0.6).abs() < 1e-15 && (a.t_b - 0.8).abs() < 1e-15);
        assert_eq!(a.get(Axis::DeltaT), a.t_b - a.t_a);
    }

    #[test]
    fn serde_shape() {
        let p = SystemParams::new(1.0, 1.0, 0.6, 0.01).unwrap();
        let op = OperatingPoint::fermi(p, 0.15, 0.9, 1.1);
        let s = serde_json::to_string(&op).unwrap();
        assert!(s.contains("\"eps_a\"") && s.contains("\"statistics\":\"fermi\""));
        let back: OperatingPoint = serde_json::from_str(&s).unwrap();
        assert_eq!(back, op);
    }
}
