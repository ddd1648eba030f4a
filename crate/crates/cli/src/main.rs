//! `nearstab`: nearest Hurwitz/Schur-stable pencil from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nearstab_core::{Field, StabilityRegion};

#[derive(Debug, Parser)]
#[command(name = "nearstab", version, about = "Distance to the nearest stable matrix pencil")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a nearest stable pencil for a pencil file.
    Solve(SolveArgs),
    /// Project a single scalar pencil `a + xb` onto the stable set.
    Project(ProjectArgs),
    /// Write a test pencil file.
    Generate(GenerateArgs),
    /// Run a batch experiment on random pencils.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Input pencil (JSON).
    #[arg(long)]
    pub input: PathBuf,
    /// Result file (JSON); printed to stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// `hurwitz` or `schur`.
    #[arg(long, default_value = "hurwitz")]
    pub region: StabilityRegion,
    /// `real` optimizes over orthogonal matrices, `complex` over unitary ones.
    /// Defaults to the field of the input file.
    #[arg(long)]
    pub field: Option<Field>,
    #[arg(long, value_enum, default_value = "identity")]
    pub init: InitKind,
    /// Independent runs with seeds `seed, seed + 1, ...`; the best is kept.
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Time budget per run, in seconds.
    #[arg(long)]
    pub max_time: Option<f64>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    /// Regularization size for singular minimizers (default `1e-10 ||P||`).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Relative rank and eigenvalue tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InitKind {
    Identity,
    Random,
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    #[arg(long, default_value = "hurwitz")]
    pub region: StabilityRegion,
    #[arg(long, allow_hyphen_values = true)]
    pub a_re: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub a_im: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub b_re: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub b_im: f64,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub kind: GenerateKind,
    /// Output pencil file; printed to stdout when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum GenerateKind {
    /// `xI - M` with `M` the Grcar matrix.
    Grcar {
        #[arg(long)]
        n: usize,
    },
    /// Damped mass-spring chain of `n` masses (pencil size `2n`).
    Oscillator {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Gaussian pencil scaled by `1 / (sqrt(2) n)`, optionally with `B`
    /// truncated to a given rank.
    Gaussian {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "real")]
        field: Field,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        rank: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(subcommand)]
    pub kind: ExperimentKind,
    #[arg(long, global = true, default_value = "hurwitz")]
    pub region: StabilityRegion,
    #[arg(long, global = true, default_value = "real")]
    pub field: Field,
    #[arg(long, global = true, value_enum, default_value = "identity")]
    pub init: InitKind,
    #[arg(long, global = true, default_value_t = 10)]
    pub samples: usize,
    /// Time budget per solve, in seconds.
    #[arg(long, global = true, default_value_t = 10.0)]
    pub max_time: f64,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// `.dat` rows (sweeps) or JSON (jordan); printed to stdout when omitted.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ExperimentKind {
    /// Mean distance for each pencil size.
    Size {
        #[arg(long, value_delimiter = ',', default_values_t = [4, 8, 12, 16, 20, 24, 30])]
        sizes: Vec<usize>,
    },
    /// Mean distance for each rank of `B` at a fixed size.
    Rank {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        ranks: Vec<usize>,
    },
    /// Fraction of minimizers with a nontrivial Jordan chain.
    Jordan {
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nearstab: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
