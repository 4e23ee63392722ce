mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Elastic principal curves, maps and trees; projection-quality scoring;
/// invariant manifolds of sampled dynamical systems.
#[derive(Debug, Parser)]
#[command(name = "elmap", version)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a principal curve: a fixed-length chain, or one grown without branches.
    FitCurve(FitCurveArgs),
    /// Fit a 2D elastic map on a rectangular grid.
    FitMap(FitMapArgs),
    /// Grow a principal tree and draw it as a metro map.
    FitTree(FitTreeArgs),
    /// Score projections of a dataset with MSE, QDM, QNP and QGC.
    Metrics(MetricsArgs),
    /// Sample around a limit cycle and fit its invariant manifold.
    Dynsys(DynsysArgs),
    /// Write one of the seeded synthetic datasets.
    #[command(hide = true)]
    GenSynthetic(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Dsv,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Input data file (delimiter-separated; a non-numeric first row is a header).
    #[arg(long)]
    input: Option<PathBuf>,
    /// TOML file with the same keys as the long flags (dashes as underscores).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parent directory of run directories [default: runs].
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Run directory name [default: content hash of inputs and settings].
    #[arg(long)]
    run_name: Option<String>,
    /// Field delimiter [default: tab for .tsv/.tab, comma otherwise].
    #[arg(long)]
    delimiter: Option<char>,
    /// Header name of the label column [default: "label" when present].
    #[arg(long)]
    label_column: Option<String>,
    /// Artifact types to write [default: all].
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    /// Seed for sampling and random baselines; fits themselves are deterministic [default: 0].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct Elastic {
    /// Edge stretching modulus.
    #[arg(long)]
    lambda: Option<f64>,
    /// Star bending modulus.
    #[arg(long)]
    mu: Option<f64>,
    /// EM iteration cap.
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Relative functional decrease that stops the fit.
    #[arg(long)]
    rel_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct FitCurveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    elastic: Elastic,
    /// Fit a chain of exactly this many nodes instead of growing one.
    #[arg(long)]
    nodes: Option<usize>,
    /// Grammar applications when growing [default: 20].
    #[arg(long)]
    cc_max: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct FitMapArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    elastic: Elastic,
    /// Grid shape as ROWSxCOLS [default: 10x10].
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct FitTreeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    elastic: Elastic,
    /// Allowed branch points (3-stars; higher stars forbidden) [default: 1].
    #[arg(long, conflicts_with = "sc_max")]
    b_max: Option<u64>,
    /// Bound the number of vertices instead of the branch count.
    #[arg(long)]
    sc_max: Option<u64>,
    /// Grammar applications [default: 30].
    #[arg(long)]
    cc_max: Option<usize>,
    /// EM iterations for each candidate during selection [default: 10].
    #[arg(long)]
    candidate_iterations: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[command(flatten)]
    common: Common,
    /// Projected coordinates, one file per projection, rows in input order.
    #[arg(long = "projection")]
    projection: Vec<PathBuf>,
    /// Neighbourhood sizes [default: 5,10].
    #[arg(long, value_delimiter = ',')]
    k_list: Option<Vec<usize>>,
    /// Natural-PCA pairs for QDM [default: min(N-1, 100)].
    #[arg(long)]
    npca_n: Option<usize>,
    /// Random-baseline trials; 0 skips them [default: 100].
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct DynsysArgs {
    /// Bundled system: brusselator, vdp, vdp3.
    system: Option<String>,
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    elastic: Elastic,
    /// Initial state, comma-separated [default: 0.5 in every coordinate].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Option<Vec<f64>>,
    /// Time integrated before looking for the cycle [default: 100].
    #[arg(long)]
    settle_time: Option<f64>,
    /// Return distance that closes the cycle [default: 1e-4].
    #[arg(long)]
    cycle_tol: Option<f64>,
    /// Trajectory length [default: 15].
    #[arg(long)]
    t_m: Option<f64>,
    /// Transient fraction discarded [default: 0.3].
    #[arg(long)]
    alpha: Option<f64>,
    /// Largest shift off the cycle [default: 1].
    #[arg(long)]
    delta_max: Option<f64>,
    /// Samples to collect [default: 5000].
    #[arg(long)]
    n_samples: Option<usize>,
    /// Integration step [default: 0.01].
    #[arg(long)]
    dt: Option<f64>,
    /// Recording interval [default: 0.05].
    #[arg(long)]
    dt_record: Option<f64>,
    /// Manifold grid as ROWSxCOLS [default: 20x20].
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SyntheticKind {
    Parabola,
    SCurve,
    YBranches,
    CountryLike,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    kind: SyntheticKind,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    /// Ambient dimension (S-curve only).
    #[arg(long, default_value_t = 10)]
    dim: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file [default: standard output].
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Numeric(String),
}

impl From<elmap::Error> for CliError {
    fn from(e: elmap::Error) -> Self {
        if e.is_input_error() {
            CliError::Input(e.to_string())
        } else {
            CliError::Numeric(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::FitCurve(a) => commands::fit_curve(a),
        Command::FitMap(a) => commands::fit_map(a),
        Command::FitTree(a) => commands::fit_tree(a),
        Command::Metrics(a) => commands::metrics(a),
        Command::Dynsys(a) => commands::dynsys(a),
        Command::GenSynthetic(a) => commands::gen_synthetic(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
    }
}
