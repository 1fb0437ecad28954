use thiserror::Error;

/// Errors raised by the model, solver and analysis layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kappa = {kappa} is within the guard band of the phase boundary {boundary}")]
    NearPhaseBoundary { kappa: f64, boundary: f64 },

    #[error("bose occupation diverges at eps = {eps} (T = {temperature})")]
    BoseDivergence { eps: f64, temperature: f64 },

    #[error("reservoirs must share statistics")]
    MixedStatistics,

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate steady state: |lambda_1| = {second:e}, |lambda_0| = {smallest:e}")]
    DegenerateSteadyState { smallest: f64, second: f64 },

    #[error("state is not X-structured (largest off-X entry {0:e})")]
    NotXState(f64),

    #[error("closed-form regime violated: |rho14| = {rho14:e}, |rho23| = {rho23:e}")]
    Regime { rho14: f64, rho23: f64 },

    #[error("closed-form and general verdicts disagree: {0}")]
    PathDisagreement(String),

    #[error("correlation hierarchy violated: {0}")]
    HierarchyViolation(String),

    #[error("input is not a steady state (residual {0:e})")]
    NotSteady(f64),

    #[error("time step {dt} exceeds the stability limit {max}")]
    UnstableStep { dt: f64, max: f64 },

    #[error("reservoirs are not in equilibrium")]
    NotEquilibrium,

    #[error("invalid sweep configuration: {0}")]
    InvalidSweep(String),

    #[error("threshold search failed: {0}")]
    Threshold(String),

    #[error("cell (x = {x}, y = {y}): {message}")]
    Cell { x: f64, y: f64, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
