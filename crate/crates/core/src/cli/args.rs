//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "lsi", version, about = "Log-Sobolev constants of Gaussian convolutions")]
pub struct Cli {
    /// Output format (default json).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Closed-form upper and lower bounds over an (R, δ, n) grid.
    Bound(BoundArgs),
    /// Bobkov–Götze functionals of a smoothed measure.
    Bg(BgArgs),
    /// Variational lower bounds Ent/Energy over a test-function family.
    Lower(LowerArgs),
    /// Slack tables for the tail inequalities.
    Lemmas(LemmasArgs),
    /// Random-matrix concentration experiment.
    Rmt(RmtArgs),
    /// Growth rate of a constant estimate in 1/δ.
    Sweep(SweepArgs),
    /// Re-run the configuration recorded in a JSON output file.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Support radii, `a,b,c` or `start:stop:count`.
    #[arg(long = "R", allow_hyphen_values = true)]
    pub r: String,
    /// Smoothing variances, `a,b,c` or `start:stop:count` (geometric).
    #[arg(long)]
    pub delta: String,
    /// Dimensions.
    #[arg(long, default_value = "1")]
    pub n: String,
    /// Lower density bounds a for the uniform-density bound.
    #[arg(long)]
    pub a: Option<String>,
}

#[derive(Debug, Args)]
pub struct BgArgs {
    /// Measure JSON file.
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long)]
    pub delta: String,
    #[command(flatten)]
    pub numerics: BgTuning,
}

/// Numerical settings of the Bobkov–Götze evaluation.
#[derive(Debug, Args)]
pub struct BgTuning {
    /// Target accuracy of D₀ and D₁.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 257)]
    pub grid_points: usize,
    /// How many times the truncation window may double.
    #[arg(long, default_value_t = 6)]
    pub max_extensions: usize,
    /// Subdivision budget of each integral of 1/p.
    #[arg(long, default_value_t = 200)]
    pub max_subdivisions: usize,
    /// Tail level setting the initial window (default tol·1e-3).
    #[arg(long)]
    pub tail_epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Step,
    Exp,
}

#[derive(Debug, Args)]
pub struct LowerArgs {
    #[arg(long)]
    pub measure: PathBuf,
    #[arg(long)]
    pub delta: String,
    #[arg(long, value_enum, default_value = "step")]
    pub family: FamilyArg,
    /// Family parameters (α for exp, ramp start for step).
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<String>,
    /// Ramp width of the step family; defaults to δ/R.
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct LemmasArgs {
    #[arg(long, required_unless_present = "gaussian")]
    pub measure: Option<PathBuf>,
    #[arg(long, required_unless_present = "gaussian")]
    pub delta: Option<String>,
    /// Evaluation points, `a,b,c` or `start:stop:count` (linear).
    /// Defaults to 25 points on [R, R + 6√δ], or 81 on [0, 40] with `--gaussian`.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Check the Gaussian tail inequalities instead.
    #[arg(long, conflicts_with_all = ["measure", "delta"])]
    pub gaussian: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatArg {
    Identity,
    Abs,
}

#[derive(Debug, Args)]
pub struct RmtArgs {
    /// Ensemble JSON file.
    #[arg(long)]
    pub ensemble: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "identity")]
    pub stat: StatArg,
    /// Tail levels ε for P(|F − E F| ≥ ε).
    #[arg(long)]
    pub eps: Option<String>,
    /// LSI constant for the reference tail bound.
    #[arg(long)]
    pub lsi_constant: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// 468·(D₀ + D₁)
    Bg,
    /// Ent/Energy of the step from 0 to δ/R
    Lower,
    /// The n-dimensional closed-form bound
    Nd,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub measure: PathBuf,
    /// `start:stop:count` (geometric) or a list.
    #[arg(long)]
    pub deltas: String,
    #[arg(long, value_enum, default_value = "bg")]
    pub estimator: Estimator,
    /// Dimension for the `nd` estimator.
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// `--tol` is also the quadrature tolerance of the `lower` estimator.
    #[command(flatten)]
    pub numerics: BgTuning,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// JSON output of an earlier run, or a bare configuration.
    pub file: PathBuf,
}
