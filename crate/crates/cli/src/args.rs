use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pvw", version, about = "Optimal p-value weights for multiple testing")]
pub struct Cli {
    /// Log solver internals (dual trajectory, breakpoints, branch taken).
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute weights for a study file.
    Weights(WeightsArgs),
    /// Compute weights and run weighted Bonferroni or Benjamini-Hochberg.
    Test(TestArgs),
    /// Run a simulation design and write power curves as CSV.
    Simulate(SimulateArgs),
    /// Ratio of optimal to unweighted power on a sparse-mixture grid, as CSV.
    SparsePower(SparsePowerArgs),
    /// Report whether the small-q and simple sufficient conditions hold.
    CheckCondition(CheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    Bayes,
    Spjotvoll,
    Exponential,
    Filter,
    Unweighted,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Bayes => "bayes",
            Scheme::Spjotvoll => "spjotvoll",
            Scheme::Exponential => "exponential",
            Scheme::Filter => "filter",
            Scheme::Unweighted => "unweighted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailArg {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Procedure {
    Bonferroni,
    Bh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Design {
    /// Random prior means and variances; sweeps each scheme's parameter.
    Compare,
    /// Two classes of means; sweeps the fraction of large means.
    Sparse,
}

/// Per-test level, given directly or as a family-wise level.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Level {
    /// Per-test level q; test i rejects when P_i <= q w_i.
    #[arg(long)]
    pub q: Option<f64>,

    /// Family-wise level alpha; sets q = alpha / (number of tests).
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct StudyInput {
    /// Tab-separated study file.
    #[arg(long)]
    pub input: PathBuf,

    /// Prior sample size for rows without an n_prior value.
    #[arg(long)]
    pub n_prior: Option<f64>,

    /// Current sample size for rows without an n_current value.
    #[arg(long)]
    pub n_current: Option<f64>,

    /// Test one or both tails [default: two if any prior_p lacks a sign, else one].
    #[arg(long, value_enum)]
    pub tail: Option<TailArg>,
}

#[derive(Debug, Clone, Args)]
pub struct SchemeArgs {
    #[arg(long, value_enum, default_value_t = Scheme::Bayes)]
    pub scheme: Scheme,

    /// Dispersion multiplying the prior variances (bayes only) [default: 1].
    #[arg(long)]
    pub phi: Option<f64>,

    /// Exponential tilt (exponential only).
    #[arg(long)]
    pub beta: Option<f64>,

    /// Filtering threshold M <= 0 (filter only).
    #[arg(long = "filter-M", visible_alias = "filter-m", allow_hyphen_values = true)]
    pub filter_m: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct WeightsArgs {
    #[command(flatten)]
    pub study: StudyInput,

    #[command(flatten)]
    pub level: Level,

    #[command(flatten)]
    pub scheme: SchemeArgs,

    /// Output weights file (TSV).
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub study: StudyInput,

    #[command(flatten)]
    pub level: Level,

    #[command(flatten)]
    pub scheme: SchemeArgs,

    /// Bonferroni at q*, or Benjamini-Hochberg at FDR level J q*.
    #[arg(long, value_enum, default_value_t = Procedure::Bonferroni)]
    pub procedure: Procedure,

    /// Output outcomes file (TSV).
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Design::Compare)]
    pub design: Design,

    #[arg(long)]
    pub seed: u64,

    /// Independent prior draws averaged (compare design only) [default: 1].
    #[arg(long)]
    pub reps: Option<usize>,

    /// Number of tests.
    #[arg(long, default_value_t = 1000)]
    pub j: usize,

    /// Per-test level.
    #[arg(long, default_value_t = 0.01)]
    pub q: f64,

    /// Grid points per swept parameter.
    #[arg(long, default_value_t = 17)]
    pub points: usize,

    /// Output CSV file.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SparsePowerArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub q: f64,

    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    pub m_min: f64,

    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub m_max: f64,

    #[arg(long, default_value_t = 50)]
    pub m_points: usize,

    #[arg(long, default_value_t = 0.0)]
    pub pi1_min: f64,

    #[arg(long, default_value_t = 0.5)]
    pub pi1_max: f64,

    #[arg(long, default_value_t = 50)]
    pub pi1_points: usize,

    /// Output CSV file.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub study: StudyInput,

    #[command(flatten)]
    pub level: Level,

    /// Dispersion multiplying the prior variances [default: 1].
    #[arg(long)]
    pub phi: Option<f64>,

    /// K in the simple condition: at least K priors in the required band.
    #[arg(long, default_value_t = 10)]
    pub k: usize,

    /// Write the report here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
