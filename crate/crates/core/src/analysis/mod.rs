//! Phase-diagram sweeps, threshold searches and the closed-form threshold formulas.

pub mod boundary;
pub mod formulas;
pub mod point;
pub mod sweep;
pub mod threshold;

pub use boundary::{
    boundary_crossings, entanglement_boundary_fit, hierarchy_check, BoundaryFit, Crossing,
    HierarchyViolation,
};
pub use formulas::{analytic_thresholds, AnalyticInputs, AnalyticValue};
pub use point::{evaluate, Axis, OperatingPoint, PointReport};
pub use sweep::{sweep2d, sweep2d_with_jobs, AxisRange, CellResult, RegionCounts, RegionMap, SweepConfig};
pub use threshold::{auto_bracket, criterion_margin, threshold_kappa, Criterion, ThresholdOutcome, ThresholdResult};
