//! Run configuration: JSON files layered over command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use steerlab::analysis::formulas::AnalyticInputs;
use steerlab::analysis::{Criterion, OperatingPoint, SweepConfig};
use steerlab::model::{derive_params, Basis};
use steerlab::Statistics;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Steady,
    Sweep,
    Threshold,
    Evolve,
    ThresholdsTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Fully resolved configuration. This is what a manifest echoes back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<OperatingPoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<AnalyticInputs>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSpec {
    #[serde(default = "all_criteria")]
    pub criteria: Vec<Criterion>,
    /// Explicit kappa bracket. Without one, both coupling phases are scanned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<(f64, f64)>,
    #[serde(default = "default_scan_points")]
    pub scan_points: usize,
}

fn all_criteria() -> Vec<Criterion> {
    vec![Criterion::Entanglement, Criterion::AtoB, Criterion::BtoA, Criterion::TwoWay, Criterion::Bell]
}

fn default_scan_points() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSpec {
    pub init: InitState,
    /// Defaults to `20 / gamma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    /// Defaults to half the stability limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Keep every n-th step. Defaults to about 1000 rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stride: Option<usize>,
    #[serde(default)]
    pub coherent_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitState {
    GroundLocal,
    MaximallyMixed,
    Steady,
    Custom(Box<MatrixJson>),
}

/// Complex 4x4 matrix split into real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub basis: Basis,
    pub re: [[f64; 4]; 4],
    pub im: [[f64; 4]; 4],
}

/// Flag values, all optional. Anything present in a config file wins.
#[derive(Debug, Default)]
pub struct Layers {
    pub point: Map<String, Value>,
    pub x: Option<Value>,
    pub y: Option<Value>,
    pub threshold: Map<String, Value>,
    pub evolve: Map<String, Value>,
    pub format: Option<Format>,
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Reads a config file. A manifest is accepted too, through its `config` echo.
pub fn read_config(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let Value::Object(mut m) = v else {
        return Err(config_err(format!("{}: expected a JSON object", path.display())));
    };
    if m.contains_key("tool") {
        if let Some(Value::Object(inner)) = m.remove("config") {
            return Ok(inner);
        }
    }
    Ok(m)
}

/// Recursive object merge; `top` wins on conflicts.
fn merge(base: &mut Map<String, Value>, top: &Map<String, Value>) {
    for (k, v) in top {
        match (base.get_mut(k), v) {
            (Some(Value::Object(b)), Value::Object(t)) => merge(b, t),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

fn defaults() -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("statistics".into(), "bose".into());
    m.insert("eps_a".into(), 1.0.into());
    m.insert("eps_b".into(), 1.0.into());
    m.insert("gamma".into(), 0.01.into());
    m
}

/// Equal temperatures and chemical potentials unless B is given separately.
fn fill_b_side(m: &mut Map<String, Value>) {
    for (a, b) in [("t_a", "t_b"), ("mu_a", "mu_b")] {
        if !m.contains_key(b) {
            if let Some(v) = m.get(a).cloned() {
                m.insert(b.into(), v);
            }
        }
    }
}

fn section(cfg: &Map<String, Value>, key: &str) -> Result<Map<String, Value>, CliError> {
    match cfg.get(key) {
        None => Ok(Map::new()),
        Some(Value::Object(m)) => Ok(m.clone()),
        Some(_) => Err(config_err(format!("`{key}` must be an object"))),
    }
}

fn typed<T: serde::de::DeserializeOwned>(what: &str, m: Map<String, Value>) -> Result<T, CliError> {
    serde_json::from_value(Value::Object(m)).map_err(|e| config_err(format!("{what}: {e}")))
}

fn point_map(layers: &Layers, cfg: &Map<String, Value>) -> Result<Map<String, Value>, CliError> {
    let mut m = defaults();
    merge(&mut m, &layers.point);
    merge(&mut m, &section(cfg, "point")?);
    fill_b_side(&mut m);
    Ok(m)
}

fn check_point(op: &OperatingPoint) -> Result<(), CliError> {
    op.params.validate().map_err(config_err)?;
    op.reservoirs().map_err(config_err)?;
    derive_params(&op.params).map_err(config_err)?;
    Ok(())
}

/// Builds the configuration for `mode` from flags and an optional config file.
pub fn resolve(mode: Mode, layers: Layers, file: Option<&Path>) -> Result<RunConfig, CliError> {
    let cfg = match file {
        Some(p) => read_config(p)?,
        None => Map::new(),
    };
    let known = ["mode", "description", "format", "point", "sweep", "threshold", "evolve", "table"];
    if let Some(k) = cfg.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(config_err(format!("unknown config key `{k}`")));
    }
    if let Some(m) = cfg.get("mode") {
        let m: Mode = serde_json::from_value(m.clone()).map_err(|e| config_err(format!("mode: {e}")))?;
        if m != mode {
            return Err(config_err(format!("config is for `{}`, not this command", mode_name(m))));
        }
    }
    let format = match cfg.get("format") {
        Some(f) => Some(serde_json::from_value(f.clone()).map_err(|e| config_err(format!("format: {e}")))?),
        None => layers.format,
    };
    let description = match cfg.get("description") {
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(config_err("`description` must be a string")),
        None => None,
    };
    let mut out = RunConfig {
        mode,
        description: None,
        format,
        point: None,
        sweep: None,
        threshold: None,
        evolve: None,
        table: None,
    };
    match mode {
        Mode::Steady => {
            let op: OperatingPoint = typed("point", point_map(&layers, &cfg)?)?;
            check_point(&op)?;
            out.point = Some(op);
        }
        Mode::Sweep => {
            let mut s = Map::new();
            s.insert("base".into(), Value::Object(point_map(&layers, &cfg)?));
            if let Some(x) = &layers.x {
                s.insert("x".into(), x.clone());
            }
            if let Some(y) = &layers.y {
                s.insert("y".into(), y.clone());
            }
            let mut from_file = section(&cfg, "sweep")?;
            if let Some(Value::Object(b)) = from_file.get_mut("base") {
                fill_b_side(b);
            }
            merge(&mut s, &from_file);
            if !s.contains_key("x") || !s.contains_key("y") {
                return Err(config_err("a sweep needs both axes (--x and --y, or `sweep.x` and `sweep.y`)"));
            }
            let sw: SweepConfig = typed("sweep", s)?;
            sw.validate().map_err(config_err)?;
            sw.base.params.validate().map_err(config_err)?;
            sw.base.reservoirs().map_err(config_err)?;
            out.description = description;
            out.sweep = Some(sw);
        }
        Mode::Threshold => {
            let op: OperatingPoint = typed("point", point_map(&layers, &cfg)?)?;
            op.params.validate().map_err(config_err)?;
            op.reservoirs().map_err(config_err)?;
            let mut t = layers.threshold.clone();
            merge(&mut t, &section(&cfg, "threshold")?);
            let spec: ThresholdSpec = typed("threshold", t)?;
            if spec.criteria.is_empty() {
                return Err(config_err("no threshold criteria given"));
            }
            if let Some((lo, hi)) = spec.bracket {
                if !(lo > 0.0 && lo < hi && hi.is_finite()) {
                    return Err(config_err(format!("bracket [{lo}, {hi}] must satisfy 0 < lo < hi")));
                }
            }
            if spec.scan_points < 2 {
                return Err(config_err("scan_points must be at least 2"));
            }
            out.point = Some(op);
            out.threshold = Some(spec);
        }
        Mode::Evolve => {
            let op: OperatingPoint = typed("point", point_map(&layers, &cfg)?)?;
            check_point(&op)?;
            let mut e = layers.evolve.clone();
            merge(&mut e, &section(&cfg, "evolve")?);
            if !e.contains_key("init") {
                e.insert("init".into(), serde_json::json!({ "kind": "ground_local" }));
            }
            let spec: EvolveSpec = typed("evolve", e)?;
            out.point = Some(op);
            out.evolve = Some(spec);
        }
        Mode::ThresholdsTable => {
            let p = point_map(&layers, &cfg)?;
            let mut t = table_from_point(&p)?;
            merge(&mut t, &section(&cfg, "table")?);
            let inp: AnalyticInputs = typed("table", t)?;
            if !(inp.bar_eps > 0.0 && inp.temperature > 0.0 && inp.temperature.is_finite()) {
                return Err(config_err("need a positive mean qubit energy and temperature"));
            }
            out.table = Some(inp);
        }
    }
    Ok(out)
}

fn table_from_point(p: &Map<String, Value>) -> Result<Map<String, Value>, CliError> {
    let num = |k: &str| p.get(k).and_then(Value::as_f64);
    let mut t = Map::new();
    t.insert("statistics".into(), p.get("statistics").cloned().unwrap_or_else(|| "bose".into()));
    if let (Some(a), Some(b)) = (num("eps_a"), num("eps_b")) {
        t.insert("bar_eps".into(), ((a + b) / 2.0).into());
        t.insert("delta_eps".into(), (a - b).into());
    }
    if let (Some(a), Some(b)) = (num("t_a"), num("t_b")) {
        t.insert("temperature".into(), ((a + b) / 2.0).into());
    }
    let mu = (num("mu_a").unwrap_or(0.0) + num("mu_b").unwrap_or(0.0)) / 2.0;
    t.insert("mu_bar".into(), mu.into());
    let _: Statistics = serde_json::from_value(t["statistics"].clone()).map_err(|e| config_err(format!("statistics: {e}")))?;
    Ok(t)
}

pub fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Steady => "steady",
        Mode::Sweep => "sweep",
        Mode::Threshold => "threshold",
        Mode::Evolve => "evolve",
        Mode::ThresholdsTable => "thresholds-table",
    }
}
