//! Command-line parsing and the validated run configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use urnlab::montecarlo::Tolerances;
use urnlab::urn::DEFAULT_THINNING;
use urnlab::verify::DEFAULT_SEED;

#[derive(Debug, Parser)]
#[command(name = "urnlab", version, about = "Nonlinear reinforced urns: simulation and phase analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate an ensemble of trajectories and classify their limits.
    Simulate(SimulateArgs),
    /// Roots, stationary points, stability and phase of one model.
    Analyze(AnalyzeArgs),
    /// Label an (a, beta) grid with phases and emit boundary curves.
    Phase(PhaseArgs),
    /// Run the reproduction criteria.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Symmetric,
    Cyclic,
    #[value(name = "general", alias = "general-matrix")]
    General,
    TwoType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "symmetric")]
    pub model: ModelKind,
    /// Off-diagonal interaction strength (cyclic default 1).
    #[arg(short = 'a', long = "a", allow_hyphen_values = true)]
    pub a: Option<f64>,
    /// Reinforcement exponent.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    /// Number of colours (symmetric model only).
    #[arg(short = 'd', long)]
    pub d: Option<usize>,
    /// Interaction matrix file for the general model.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "traj", default_value_t = 20)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 100_000)]
    pub steps: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_THINNING)]
    pub thinning: u64,
    #[arg(long)]
    pub point_tol: Option<f64>,
    #[arg(long)]
    pub winding_min: Option<f64>,
    #[arg(long)]
    pub radius_min: Option<f64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Grid resolution of the numerical stationary-point search.
    #[arg(long, default_value_t = urnlab::stationary::DEFAULT_SEARCH_RESOLUTION)]
    pub resolution: usize,
    /// Also write `analysis.json` here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseKind {
    Symmetric,
    Cyclic,
}

#[derive(Debug, Clone, Args)]
pub struct PhaseArgs {
    #[arg(long, value_enum, default_value = "symmetric")]
    pub model: PhaseKind,
    #[arg(long, default_value_t = 0.05)]
    pub a_min: f64,
    #[arg(long, default_value_t = 0.95)]
    pub a_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub a_step: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta_min: f64,
    #[arg(long, default_value_t = 6.0)]
    pub beta_max: f64,
    #[arg(long, default_value_t = 0.25)]
    pub beta_step: f64,
    /// Cyclic grids: search every cell for stable points besides the centre.
    #[arg(long)]
    pub search: bool,
    /// Run ensembles on every cell and record agreement with the label.
    #[arg(long)]
    pub empirical: bool,
    #[arg(long, default_value_t = 20)]
    pub traj: usize,
    #[arg(long, default_value_t = 100_000)]
    pub steps: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Analytic criteria only.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Also write `verify.json` here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Simulate,
    Analyze,
    Phase,
    Verify,
}

/// Model part of a run, after validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub a: Option<f64>,
    pub beta: f64,
    pub d: usize,
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub kind: PhaseKind,
    pub a: [f64; 3],
    pub beta: [f64; 3],
    pub search: bool,
    pub empirical: bool,
}

/// Everything a run depends on. Written to the provenance sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: Action,
    pub model: Option<ModelConfig>,
    pub grid: Option<GridConfig>,
    pub steps: Option<u64>,
    pub trajectories: Option<usize>,
    pub seed: Option<u64>,
    pub thinning: Option<u64>,
    pub tolerances: Option<Tolerances>,
    pub resolution: Option<usize>,
    pub quick: bool,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl ModelConfig {
    pub fn from_args(args: &ModelArgs) -> Result<Self, ConfigError> {
        if !args.beta.is_finite() || args.beta <= 0.0 {
            return bad(format!("--beta must be positive, got {}", args.beta));
        }
        if let Some(a) = args.a {
            if !a.is_finite() || a < 0.0 {
                return bad(format!("-a must be nonnegative, got {a}"));
            }
        }
        let d = match args.model {
            ModelKind::General => {
                if args.matrix.is_none() {
                    return bad("--model general needs --matrix");
                }
                if args.a.is_some() || args.d.is_some() {
                    return bad("--model general takes its size and entries from --matrix; drop -a and -d");
                }
                0
            }
            kind => {
                if args.matrix.is_some() {
                    return bad(format!("--matrix is only valid with --model general, not {kind:?}"));
                }
                if args.a.is_none() && kind != ModelKind::Cyclic {
                    return bad(format!("--model {kind:?} needs -a"));
                }
                match (kind, args.d) {
                    (ModelKind::Symmetric, None) => 3,
                    (ModelKind::Symmetric, Some(d)) if d >= 2 => d,
                    (ModelKind::Cyclic, None | Some(3)) => 3,
                    (ModelKind::TwoType, None | Some(2)) => 2,
                    (kind, Some(d)) => return bad(format!("-d {d} is not valid for --model {kind:?}")),
                    _ => unreachable!("general handled above"),
                }
            }
        };
        // The cyclic model defaults to the unit cyclic matrix.
        let a = match args.model {
            ModelKind::Cyclic => Some(args.a.unwrap_or(1.0)),
            _ => args.a,
        };
        Ok(Self {
            kind: args.model,
            a,
            beta: args.beta,
            d,
            matrix: args.matrix.clone(),
        })
    }
}

fn tolerances(args: &SimulateArgs) -> Result<Tolerances, ConfigError> {
    let mut t = Tolerances::default();
    for (name, value, slot) in [
        ("--point-tol", args.point_tol, &mut t.point_tol),
        ("--winding-min", args.winding_min, &mut t.winding_min),
        ("--radius-min", args.radius_min, &mut t.radius_min),
    ] {
        if let Some(v) = value {
            if !v.is_finite() || v <= 0.0 {
                return bad(format!("{name} must be positive, got {v}"));
            }
            *slot = v;
        }
    }
    Ok(t)
}

impl RunConfig {
    fn empty(subcommand: Action) -> Self {
        Self {
            subcommand,
            model: None,
            grid: None,
            steps: None,
            trajectories: None,
            seed: None,
            thinning: None,
            tolerances: None,
            resolution: None,
            quick: false,
            out: None,
            format: None,
        }
    }

    pub fn from_command(cmd: &Command) -> Result<Self, ConfigError> {
        match cmd {
            Command::Simulate(s) => {
                if s.trajectories == 0 {
                    return bad("--traj must be at least 1");
                }
                if s.steps == 0 {
                    return bad("--steps must be at least 1");
                }
                if s.thinning == 0 {
                    return bad("--thinning must be at least 1");
                }
                Ok(Self {
                    model: Some(ModelConfig::from_args(&s.model)?),
                    steps: Some(s.steps),
                    trajectories: Some(s.trajectories),
                    seed: Some(s.seed),
                    thinning: Some(s.thinning),
                    tolerances: Some(tolerances(s)?),
                    out: Some(s.out.clone()),
                    format: Some(s.format),
                    ..Self::empty(Action::Simulate)
                })
            }
            Command::Analyze(s) => {
                if s.resolution < 10 {
                    return bad("--resolution must be at least 10");
                }
                Ok(Self {
                    model: Some(ModelConfig::from_args(&s.model)?),
                    resolution: Some(s.resolution),
                    out: s.out.clone(),
                    ..Self::empty(Action::Analyze)
                })
            }
            Command::Phase(p) => {
                if p.search && p.model != PhaseKind::Cyclic {
                    return bad("--search applies to cyclic grids only");
                }
                for (name, lo, hi, step) in [
                    ("a", p.a_min, p.a_max, p.a_step),
                    ("beta", p.beta_min, p.beta_max, p.beta_step),
                ] {
                    if !(lo > 0.0 && hi >= lo && step > 0.0) || !hi.is_finite() {
                        return bad(format!(
                            "{name} grid needs 0 < min <= max and step > 0, got {lo}..{hi} step {step}"
                        ));
                    }
                }
                if p.empirical && (p.traj == 0 || p.steps == 0) {
                    return bad("--empirical needs --traj and --steps at least 1");
                }
                Ok(Self {
                    grid: Some(GridConfig {
                        kind: p.model,
                        a: [p.a_min, p.a_max, p.a_step],
                        beta: [p.beta_min, p.beta_max, p.beta_step],
                        search: p.search,
                        empirical: p.empirical,
                    }),
                    steps: p.empirical.then_some(p.steps),
                    trajectories: p.empirical.then_some(p.traj),
                    seed: p.empirical.then_some(p.seed),
                    out: Some(p.out.clone()),
                    ..Self::empty(Action::Phase)
                })
            }
            Command::Verify(v) => Ok(Self {
                seed: Some(v.seed),
                quick: v.quick,
                out: v.out.clone(),
                ..Self::empty(Action::Verify)
            }),
        }
    }
}
