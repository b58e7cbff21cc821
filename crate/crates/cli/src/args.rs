use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Radial equations of the massive spin-3/2 field in static de Sitter coordinates.
#[derive(Debug, Parser)]
#[command(name = "spin32", version)]
pub struct Cli {
    /// TOML file with default values; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Directory for data files and manifests [env: SPIN32_OUT_DIR, default: spin32-out].
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one invariant suite.
    Verify(VerifyArgs),
    /// Print the reduced coefficient matrix and constraint rows at one point.
    Reduce(ReduceArgs),
    /// Local exponents at the singular endpoints.
    Indices(IndicesArgs),
    /// Integrate the reduced system and write the trajectory as CSV.
    Integrate(IntegrateArgs),
    /// Run a grid of independent integrations in parallel.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Algebra,
    Geometry,
    Wigner,
    Ansatz,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Algebra => "algebra",
            Suite::Geometry => "geometry",
            Suite::Wigner => "wigner",
            Suite::Ansatz => "ansatz",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EndpointChoice {
    Origin,
    Horizon,
    Both,
}

/// Quantum numbers shared by the mode-level commands.
#[derive(Debug, Default, Args)]
pub struct ModeArgs {
    /// Total angular momentum as "p/2".
    #[arg(long, allow_hyphen_values = true)]
    pub j: Option<String>,
    /// Magnetic quantum number as "p/2".
    #[arg(long, allow_hyphen_values = true)]
    pub m: Option<String>,
    /// Parity sign, +1 or -1.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// Real part of the dimensionless energy.
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// Imaginary part of the dimensionless energy.
    #[arg(long, allow_hyphen_values = true)]
    pub eps_im: Option<f64>,
    /// Dimensionless mass.
    #[arg(long, allow_hyphen_values = true)]
    pub mass: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub suite: Suite,
    /// Restrict the wigner and ansatz suites to one j.
    #[arg(long)]
    pub j: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sample count: geometry points, wigner grid size or ansatz states.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub mode: ModeArgs,
    #[arg(long)]
    pub omega: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IndicesArgs {
    #[command(flatten)]
    pub mode: ModeArgs,
    #[arg(long, value_enum)]
    pub endpoint: Option<EndpointChoice>,
}

#[derive(Debug, Default, Args)]
pub struct RangeArgs {
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    /// Relative and absolute integrator tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub mode: ModeArgs,
    #[command(flatten)]
    pub range: RangeArgs,
    /// Start from the origin expansion for this exponent index, evaluated at `--from`.
    #[arg(long)]
    pub launch: Option<usize>,
    /// Use a constraint-compatible eigenvector and project the launch state onto the constraints.
    #[arg(long)]
    pub compatible: bool,
    /// Keep the random initial state as drawn instead of projecting it onto the constraints.
    #[arg(long, conflicts_with = "launch")]
    pub raw: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated j values.
    #[arg(long, value_delimiter = ',')]
    pub js: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub deltas: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eps_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub masses: Option<Vec<f64>>,
    #[command(flatten)]
    pub range: RangeArgs,
    /// Worker threads; defaults to the rayon global pool.
    #[arg(long)]
    pub threads: Option<usize>,
}
