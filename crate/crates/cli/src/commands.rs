//! The five subcommands.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use steerlab::analysis::formulas::{analytic_thresholds, AnalyticInputs, AnalyticValue};
use steerlab::analysis::{
    auto_bracket, criterion_margin, sweep2d, sweep2d_with_jobs, threshold_kappa, Axis, Criterion, OperatingPoint,
    ThresholdOutcome,
};
use steerlab::correlations::classify;
use steerlab::model::{phase_boundary, Basis, DerivedParams, Matrix4c};
use steerlab::output::{fmt_g17, write_region_csv, write_trajectory_csv, TRAJECTORY_HEADER};
use steerlab::steady::{evolve_sampled, max_step, steady_state, steady_coherence, Trajectory};
use steerlab::transport::currents;
use steerlab::DensityMatrix4;

use crate::artifact::{emit, to_json, Manifest};
use crate::config::{Format, InitState, MatrixJson, RunConfig};
use crate::CliError;

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    PositivityViolation,
}

fn json_only(cfg: &RunConfig, what: &str) -> Result<(), CliError> {
    match cfg.format {
        Some(Format::Csv) => Err(CliError::Config(format!("{what} output is JSON only"))),
        _ => Ok(()),
    }
}

fn matrix_json(rho: &DensityMatrix4) -> MatrixJson {
    let m = rho.entries();
    MatrixJson {
        basis: rho.basis(),
        re: std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)].re)),
        im: std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)].im)),
    }
}

fn density(m: &MatrixJson) -> Result<DensityMatrix4, CliError> {
    let entries = Matrix4c::from_fn(|i, j| Complex64::new(m.re[i][j], m.im[i][j]));
    Ok(DensityMatrix4::new(entries, m.basis)?)
}

fn or_error<T: Serialize>(r: steerlab::Result<T>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).expect("reports serialize"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

#[derive(Serialize)]
struct SteadyJson {
    energy_basis: MatrixJson,
    local_basis: MatrixJson,
    coherence: [f64; 2],
    residual: f64,
    min_eigenvalue: f64,
    positivity_ok: bool,
    hermiticity_defect: f64,
}

#[derive(Serialize)]
struct SteadyReport<'a> {
    point: &'a OperatingPoint,
    derived: DerivedParams,
    coupling_ratio: f64,
    steady: SteadyJson,
    correlations: Value,
    transport: Value,
}

pub fn steady(cfg: &RunConfig, out: Option<&Path>) -> Result<Status, CliError> {
    json_only(cfg, "steady")?;
    let start = Instant::now();
    let op = cfg.point.as_ref().expect("resolved steady config has a point");
    let g = op.generator()?;
    let ss = steady_state(&g)?;
    let coh = steady_coherence(&ss);
    let report = SteadyReport {
        point: op,
        derived: *g.derived(),
        coupling_ratio: g.coupling_ratio(),
        steady: SteadyJson {
            energy_basis: matrix_json(&ss.state_energy),
            local_basis: matrix_json(&ss.state_local),
            coherence: [coh.re, coh.im],
            residual: ss.residual,
            min_eigenvalue: ss.min_eigenvalue,
            positivity_ok: ss.positivity_ok,
            hermiticity_defect: ss.hermiticity_defect,
        },
        correlations: or_error(classify(&ss.state_local, Some(g.eigen()))),
        transport: or_error(currents(&g, &ss)),
    };
    let body = to_json(&report);
    emit(out, &body, Manifest::new(cfg, start.elapsed().as_secs_f64()))?;
    if ss.positivity_ok {
        Ok(Status::Ok)
    } else {
        log::error!("steady state is not positive (min eigenvalue {:e})", ss.min_eigenvalue);
        Ok(Status::PositivityViolation)
    }
}

pub fn sweep(cfg: &RunConfig, out: Option<&Path>, jobs: Option<usize>) -> Result<Status, CliError> {
    let start = Instant::now();
    let sc = cfg.sweep.as_ref().expect("resolved sweep config has a grid");
    let map = match jobs {
        Some(n) => sweep2d_with_jobs(sc, n)?,
        None => sweep2d(sc)?,
    };
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            write_region_csv(&map, &mut buf)?;
            buf
        }
        Format::Json => to_json(&json!({ "xs": map.xs, "ys": map.ys, "cells": map.cells })),
    };
    let masked = map.masked_count();
    if masked > 0 {
        log::warn!("{masked} cells have non-positive steady states");
    }
    log::info!("swept {} cells in {:.2}s", map.cells.len(), start.elapsed().as_secs_f64());
    let mut manifest = Manifest::new(cfg, start.elapsed().as_secs_f64());
    manifest.masked_cells = Some(masked);
    emit(out, &body, manifest)?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct Comparison<'a> {
    name: &'a str,
    regime: &'a str,
    analytic: f64,
    relative_deviation: f64,
}

#[derive(Serialize)]
struct ThresholdEntry<'a> {
    criterion: Criterion,
    window: &'static str,
    range: (f64, f64),
    outcome: Value,
    comparisons: Vec<Comparison<'a>>,
}

fn analytic_names(c: Criterion) -> &'static [&'static str] {
    match c {
        Criterion::Entanglement => &["kappa_ent"],
        Criterion::TwoWay => &["kappa_steer_low", "kappa_steer_high", "kappa_steer_resonant"],
        Criterion::AtoB => &["kappa_a_to_b_low"],
        Criterion::BtoA => &["kappa_b_to_a_low"],
        Criterion::Bell => &["kappa_bell_low", "kappa_bell_resonant"],
    }
}

fn search(op: &OperatingPoint, c: Criterion, range: (f64, f64), scan: Option<usize>) -> steerlab::Result<ThresholdOutcome> {
    let Some(n) = scan else {
        return threshold_kappa(op, c, range);
    };
    match auto_bracket(op, c, range.0, range.1, n)? {
        Some(br) => threshold_kappa(op, c, br),
        None => Ok(ThresholdOutcome::NoSignChange {
            bracket: range,
            margin_lo: criterion_margin(&op.with(Axis::Kappa, range.0), c)?,
            margin_hi: criterion_margin(&op.with(Axis::Kappa, range.1), c)?,
        }),
    }
}

pub fn threshold(cfg: &RunConfig, out: Option<&Path>) -> Result<Status, CliError> {
    json_only(cfg, "threshold")?;
    let start = Instant::now();
    let op = cfg.point.as_ref().expect("resolved threshold config has a point");
    let spec = cfg.threshold.as_ref().expect("resolved threshold config has a spec");
    let p = op.params;
    let bar = p.bar_eps();
    let analytic = analytic_thresholds(&AnalyticInputs {
        statistics: op.statistics,
        bar_eps: bar,
        delta_eps: p.delta_eps(),
        temperature: op.t_bar(),
        mu_bar: op.mu_bar(),
    });
    let windows: Vec<(&'static str, (f64, f64), Option<usize>)> = match spec.bracket {
        Some(br) => vec![("bracket", br, None)],
        None => {
            let b = phase_boundary(p.eps_a, p.eps_b);
            let gap = 1e-4 * bar;
            let top = b + 20.0 * bar.max(op.t_a).max(op.t_b);
            vec![
                ("weak", (1e-3 * bar, b - gap), Some(spec.scan_points)),
                ("strong", (b + gap, top), Some(spec.scan_points)),
            ]
        }
    };
    let mut entries = Vec::new();
    for &c in &spec.criteria {
        for &(window, range, scan) in &windows {
            let outcome = search(op, c, range, scan);
            let comparisons = match &outcome {
                Ok(ThresholdOutcome::Found(r)) => analytic
                    .iter()
                    .filter(|a| analytic_names(c).contains(&a.name.as_str()))
                    .map(|a: &AnalyticValue| Comparison {
                        name: &a.name,
                        regime: &a.regime,
                        analytic: a.value,
                        relative_deviation: (r.kappa_threshold - a.value).abs() / a.value.abs(),
                    })
                    .collect(),
                _ => Vec::new(),
            };
            let outcome = match outcome {
                Ok(o) => serde_json::to_value(o).expect("outcomes serialize"),
                Err(e) => json!({ "status": "error", "message": e.to_string() }),
            };
            entries.push(ThresholdEntry { criterion: c, window, range, outcome, comparisons });
        }
    }
    let body = to_json(&json!({ "point": op, "analytic": analytic, "results": entries }));
    emit(out, &body, Manifest::new(cfg, start.elapsed().as_secs_f64()))?;
    Ok(Status::Ok)
}

#[derive(Debug, Serialize)]
struct EvolveSummary {
    t_final: f64,
    dt: f64,
    max_dt: f64,
    steps: usize,
    stride: usize,
    rows: usize,
    coherent_only: bool,
    trace_drift: f64,
    coherence_magnitude_drift: f64,
    final_generator_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_distance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    converged: Option<bool>,
}

fn trajectory_json(traj: &Trajectory) -> Vec<u8> {
    let rows: Vec<[f64; 7]> = traj
        .points
        .iter()
        .map(|pt| {
            let p = pt.state.populations();
            let c = pt.state.coherence();
            [pt.t, p[0], p[1], p[2], p[3], c.re, c.im]
        })
        .collect();
    to_json(&json!({ "columns": TRAJECTORY_HEADER, "rows": rows }))
}

fn inf_distance(a: &steerlab::generator::Vector6c, b: &steerlab::generator::Vector6c) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// The manifest echo carries the resolved step, horizon and stride.
pub fn evolve(cfg: &RunConfig, out: Option<&Path>) -> Result<Status, CliError> {
    let start = Instant::now();
    let op = cfg.point.as_ref().expect("resolved evolve config has a point");
    let spec = cfg.evolve.as_ref().expect("resolved evolve config has a spec");
    let full = op.generator()?;
    let g = if spec.coherent_only { full.coherent_only() } else { full.clone() };
    let max_dt = max_step(&g);
    let t_final = spec.t_final.unwrap_or(20.0 / op.params.gamma);
    let dt = spec.dt.unwrap_or(0.5 * max_dt);
    if !(t_final >= 0.0 && t_final.is_finite() && dt > 0.0 && dt.is_finite()) {
        return Err(CliError::Config(format!("need t_final >= 0 and dt > 0, got {t_final} and {dt}")));
    }
    if dt > max_dt {
        return Err(CliError::Config(format!(
            "time step {dt} exceeds the stability limit {max_dt}; use --dt {max_dt} or smaller"
        )));
    }
    let steps = (t_final / dt).round() as usize;
    let stride = spec.stride.unwrap_or((steps / 1000).max(1)).max(1);

    let ss = steady_state(&full)?;
    let rho0 = match &spec.init {
        InitState::GroundLocal => DensityMatrix4::diagonal([1.0, 0.0, 0.0, 0.0], Basis::Local)?,
        InitState::MaximallyMixed => DensityMatrix4::maximally_mixed(Basis::Energy),
        InitState::Steady => ss.state_energy.clone(),
        InitState::Custom(m) => density(m)?,
    };
    let traj = evolve_sampled(&g, &rho0, t_final, dt, stride)?;

    let last = traj.last().state;
    let coh0 = traj.points[0].state.coherence().norm();
    let summary = EvolveSummary {
        t_final,
        dt,
        max_dt,
        steps,
        stride,
        rows: traj.points.len(),
        coherent_only: spec.coherent_only,
        trace_drift: traj.trace_drift(),
        coherence_magnitude_drift: traj
            .points
            .iter()
            .map(|p| (p.state.coherence().norm() - coh0).abs())
            .fold(0.0, f64::max),
        final_generator_residual: g.apply(&last).0.iter().map(|z| z.norm()).fold(0.0, f64::max),
        final_distance: (!spec.coherent_only).then(|| inf_distance(&last.0, &ss.vector.0)),
        converged: (!spec.coherent_only).then(|| inf_distance(&last.0, &ss.vector.0) < 1e-8),
    };

    let mut echo = cfg.clone();
    if let Some(e) = echo.evolve.as_mut() {
        e.t_final = Some(t_final);
        e.dt = Some(dt);
        e.stride = Some(stride);
    }
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            write_trajectory_csv(&traj, &mut buf)?;
            buf
        }
        Format::Json => trajectory_json(&traj),
    };
    let summary_json = to_json(&summary);
    let mut manifest = Manifest::new(&echo, start.elapsed().as_secs_f64());
    manifest.summary = Some(serde_json::to_value(&summary).expect("summary serializes"));
    match out {
        Some(_) => {
            emit(out, &body, manifest)?;
            print_stdout(&summary_json)?;
        }
        None => {
            emit(None, &body, manifest)?;
            eprint!("{}", String::from_utf8_lossy(&summary_json));
        }
    }
    Ok(Status::Ok)
}

fn print_stdout(bytes: &[u8]) -> Result<(), CliError> {
    use std::io::Write;
    std::io::stdout().lock().write_all(bytes).map_err(|e| CliError::Runtime(format!("stdout: {e}")))
}

pub fn thresholds_table(cfg: &RunConfig, out: Option<&Path>) -> Result<Status, CliError> {
    let start = Instant::now();
    let inp = cfg.table.as_ref().expect("resolved table config has inputs");
    let values = analytic_thresholds(inp);
    let body = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json!({ "inputs": inp, "values": values })),
        Format::Csv => {
            let mut s = String::from("name,value,regime\n");
            for v in &values {
                s.push_str(&format!("{},{},{}\n", v.name, fmt_g17(v.value), v.regime));
            }
            s.into_bytes()
        }
    };
    emit(out, &body, Manifest::new(cfg, start.elapsed().as_secs_f64()))?;
    Ok(Status::Ok)
}
