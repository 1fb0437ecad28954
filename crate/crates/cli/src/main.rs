//! `steerlab` command-line front end.

mod artifact;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use commands::Status;
use config::{resolve, Format, Layers, Mode};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config files or parameters. Exit code 2.
    Config(String),
    /// Failure during computation or output. Exit code 1.
    Runtime(String),
}

impl From<steerlab::Error> for CliError {
    fn from(e: steerlab::Error) -> Self {
        use steerlab::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::NearPhaseBoundary { .. }
            | E::BoseDivergence { .. }
            | E::MixedStatistics
            | E::Unsupported(_)
            | E::InvalidState(_)
            | E::InvalidSweep(_)
            | E::UnstableStep { .. } => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "steerlab", version, about = "Steady states, steering and transport of two coupled qubits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Steady state, correlations and currents at one point.
    Steady(PointCmd),
    /// Region map over a two-axis grid.
    Sweep(SweepCmd),
    /// Critical couplings, numeric and analytic.
    Threshold(ThresholdCmd),
    /// Time evolution towards the steady state.
    Evolve(EvolveCmd),
    /// Analytic threshold formulas.
    ThresholdsTable(PointCmd),
}

#[derive(Args)]
struct Common {
    /// JSON config; its values override flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file, written atomically with a manifest beside it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatArg {
    Bose,
    Fermi,
}

#[derive(Args)]
struct PointFlags {
    #[arg(long, value_enum)]
    stat: Option<StatArg>,
    #[arg(long, allow_hyphen_values = true)]
    eps_a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eps_b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    kappa: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    ta: Option<f64>,
    /// Defaults to `--ta`.
    #[arg(long, allow_hyphen_values = true)]
    tb: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mua: Option<f64>,
    /// Defaults to `--mua`.
    #[arg(long, allow_hyphen_values = true)]
    mub: Option<f64>,
}

#[derive(Args)]
struct PointCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    point: PointFlags,
}

#[derive(Args)]
struct SweepCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    point: PointFlags,
    /// Horizontal axis as `name:min:max:points`, e.g. `delta_t:-0.5:0.5:101`.
    #[arg(long)]
    x: Option<String>,
    /// Vertical axis, same form as `--x`.
    #[arg(long)]
    y: Option<String>,
    /// Worker threads.
    #[arg(long, env = "STEERLAB_JOBS")]
    jobs: Option<usize>,
}

#[derive(Args)]
struct ThresholdCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    point: PointFlags,
    /// One of entanglement, a_to_b, b_to_a, two_way, bell. Repeatable.
    #[arg(long)]
    criterion: Vec<String>,
    /// Kappa bracket `lo,hi`. Without it both coupling phases are scanned.
    #[arg(long)]
    bracket: Option<String>,
    #[arg(long)]
    scan_points: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    GroundLocal,
    MaximallyMixed,
    Steady,
    Custom,
}

#[derive(Args)]
struct EvolveCmd {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    point: PointFlags,
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    /// JSON matrix `{"basis", "re", "im"}` for `--init custom`.
    #[arg(long)]
    init_file: Option<PathBuf>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Keep every n-th step.
    #[arg(long)]
    stride: Option<usize>,
    /// Drop both dissipators.
    #[arg(long)]
    coherent_only: bool,
}

fn point_layer(f: &PointFlags) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    if let Some(s) = f.stat {
        m.insert("statistics".into(), if matches!(s, StatArg::Bose) { "bose" } else { "fermi" }.into());
    }
    let nums = [
        ("eps_a", f.eps_a),
        ("eps_b", f.eps_b),
        ("kappa", f.kappa),
        ("gamma", f.gamma),
        ("t_a", f.ta),
        ("t_b", f.tb),
        ("mu_a", f.mua),
        ("mu_b", f.mub),
    ];
    for (k, v) in nums {
        if let Some(v) = v {
            m.insert(k.into(), v.into());
        }
    }
    m
}

fn axis_flag(s: &str) -> Result<Value, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Config(format!("axis `{s}` is not of the form name:min:max:points"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let min: f64 = parts[1].parse().map_err(|_| bad())?;
    let max: f64 = parts[2].parse().map_err(|_| bad())?;
    let points: usize = parts[3].parse().map_err(|_| bad())?;
    Ok(json!({ "axis": parts[0], "min": min, "max": max, "points": points }))
}

fn layers(common: &Common, point: &PointFlags) -> Layers {
    Layers { point: point_layer(point), format: common.format, ..Layers::default() }
}

fn run(cli: Cli) -> Result<Status, CliError> {
    match cli.command {
        Command::Steady(c) => {
            let cfg = resolve(Mode::Steady, layers(&c.common, &c.point), c.common.config.as_deref())?;
            commands::steady(&cfg, c.common.out.as_deref())
        }
        Command::Sweep(c) => {
            let mut l = layers(&c.common, &c.point);
            l.x = c.x.as_deref().map(axis_flag).transpose()?;
            l.y = c.y.as_deref().map(axis_flag).transpose()?;
            if c.jobs == Some(0) {
                return Err(CliError::Config("--jobs must be at least 1".into()));
            }
            let cfg = resolve(Mode::Sweep, l, c.common.config.as_deref())?;
            commands::sweep(&cfg, c.common.out.as_deref(), c.jobs)
        }
        Command::Threshold(c) => {
            let mut l = layers(&c.common, &c.point);
            if !c.criterion.is_empty() {
                l.threshold.insert("criteria".into(), json!(c.criterion));
            }
            if let Some(b) = &c.bracket {
                let bad = || CliError::Config(format!("bracket `{b}` is not of the form lo,hi"));
                let (lo, hi) = b.split_once(',').ok_or_else(bad)?;
                let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
                let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
                l.threshold.insert("bracket".into(), json!([lo, hi]));
            }
            if let Some(n) = c.scan_points {
                l.threshold.insert("scan_points".into(), json!(n));
            }
            let cfg = resolve(Mode::Threshold, l, c.common.config.as_deref())?;
            commands::threshold(&cfg, c.common.out.as_deref())
        }
        Command::Evolve(c) => {
            let mut l = layers(&c.common, &c.point);
            let init = match (c.init, &c.init_file) {
                (Some(InitArg::Custom) | None, Some(path)) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                    let mut m: serde_json::Map<String, Value> = serde_json::from_str(&text)
                        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                    m.insert("kind".into(), "custom".into());
                    Some(Value::Object(m))
                }
                (Some(InitArg::Custom), None) => {
                    return Err(CliError::Config("--init custom needs --init-file".into()));
                }
                (Some(_), Some(_)) => {
                    return Err(CliError::Config("--init-file only goes with --init custom".into()));
                }
                (Some(InitArg::GroundLocal), None) => Some(json!({ "kind": "ground_local" })),
                (Some(InitArg::MaximallyMixed), None) => Some(json!({ "kind": "maximally_mixed" })),
                (Some(InitArg::Steady), None) => Some(json!({ "kind": "steady" })),
                (None, None) => None,
            };
            if let Some(i) = init {
                l.evolve.insert("init".into(), i);
            }
            for (k, v) in [("t_final", c.t_final), ("dt", c.dt)] {
                if let Some(v) = v {
                    l.evolve.insert(k.into(), v.into());
                }
            }
            if let Some(s) = c.stride {
                l.evolve.insert("stride".into(), s.into());
            }
            if c.coherent_only {
                l.evolve.insert("coherent_only".into(), true.into());
            }
            let cfg = resolve(Mode::Evolve, l, c.common.config.as_deref())?;
            commands::evolve(&cfg, c.common.out.as_deref())
        }
        Command::ThresholdsTable(c) => {
            let cfg = resolve(Mode::ThresholdsTable, layers(&c.common, &c.point), c.common.config.as_deref())?;
            commands::thresholds_table(&cfg, c.common.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::PositivityViolation) => ExitCode::from(3),
        Err(CliError::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
