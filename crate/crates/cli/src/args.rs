use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "twinfock",
    version,
    about = "Parity-detection metrology of lossy twin Fock states |m::m'>",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parity expectation <Q> and fringe coefficients at one point.
    Expect(PointArgs),
    /// Visibility at one loss point, or a CSV sweep over equal-arm loss.
    Visibility(VisibilityArgs),
    /// Phase sensitivity at a given phase.
    Sensitivity(PointArgs),
    /// Optimal phase sensitivity over one fringe period.
    Optimal(OptimalArgs),
    /// Optimal sensitivity and shot-noise limit for states of fixed delta m.
    Table1(Table1Args),
    /// Grid sweep of visibility, expectation or sensitivity.
    Sweep(SweepArgs),
    /// Ranked state recommendation for a loss budget.
    Recommend(RecommendArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Output format (defaults to JSON for single points, CSV for grids).
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// TOML file of flag values; explicit flags take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Photons in the larger arm.
    #[arg(long)]
    pub m: u32,
    /// Photons in the smaller arm.
    #[arg(long)]
    pub mprime: u32,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    /// Loss rate of arm a, in [0, 1].
    #[arg(long, value_parser = parse_loss, allow_hyphen_values = true)]
    pub loss_a: Option<f64>,
    /// Loss rate of arm b, in [0, 1].
    #[arg(long, value_parser = parse_loss, allow_hyphen_values = true)]
    pub loss_b: Option<f64>,
    /// Equal loss in both arms; overridden per arm by --loss-a / --loss-b.
    #[arg(long, value_parser = parse_loss, allow_hyphen_values = true)]
    pub loss: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub loss: LossArgs,
    /// Phase on arm b, radians.
    #[arg(long, value_parser = parse_finite, allow_hyphen_values = true)]
    pub phi: f64,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct OptimalArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub loss: LossArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct LossGridArgs {
    #[arg(long, value_parser = parse_loss, allow_hyphen_values = true)]
    pub loss_start: Option<f64>,
    #[arg(long, value_parser = parse_loss, allow_hyphen_values = true)]
    pub loss_stop: Option<f64>,
    #[arg(long)]
    pub loss_steps: Option<usize>,
    /// Separate arm-b grid; without it both arms share the loss grid.
    #[arg(long, value_parser = parse_loss, allow_hyphen_values = true)]
    pub loss_b_start: Option<f64>,
    #[arg(long, value_parser = parse_loss, allow_hyphen_values = true)]
    pub loss_b_stop: Option<f64>,
    #[arg(long)]
    pub loss_b_steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VisibilityArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub loss: LossArgs,
    #[command(flatten)]
    pub grid: LossGridArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long, default_value_t = 0.05, value_parser = parse_loss, allow_hyphen_values = true)]
    pub loss: f64,
    #[arg(long, default_value_t = 6)]
    pub delta_m: u32,
    #[arg(long, default_value_t = 22)]
    pub max_total: u32,
    /// Increment of m' between rows.
    #[arg(long, default_value_t = 2)]
    pub mprime_step: u32,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// visibility, expectation or sensitivity.
    #[arg(long)]
    pub quantity: String,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub mprime: Option<u32>,
    /// Comma-separated list of m:mprime pairs, e.g. 6:0,8:2.
    #[arg(long)]
    pub states: Option<String>,
    #[command(flatten)]
    pub grid: LossGridArgs,
    #[arg(long, value_parser = parse_finite, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    #[arg(long, value_parser = parse_finite, allow_hyphen_values = true)]
    pub phi_start: Option<f64>,
    #[arg(long, value_parser = parse_finite, allow_hyphen_values = true)]
    pub phi_stop: Option<f64>,
    #[arg(long)]
    pub phi_steps: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    #[command(flatten)]
    pub loss: LossArgs,
    /// visibility or optimal_sensitivity.
    #[arg(long)]
    pub objective: String,
    /// Restrict to states with this photon number difference.
    #[arg(long)]
    pub delta_m: Option<u32>,
    /// Largest m + mprime considered.
    #[arg(long, default_value_t = twinfock::strategy::DEFAULT_MAX_TOTAL)]
    pub max_total: u32,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn parse_finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}

fn parse_loss(s: &str) -> Result<f64, String> {
    let v = parse_finite(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("must lie in [0, 1], got {v}"))
    }
}
