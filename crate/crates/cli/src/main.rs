//! `toric-loss`: Monte Carlo experiments for loss-tolerant toric code
//! decoding. Every subcommand writes CSV tables and a `manifest.json` into
//! the output directory.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(name = "toric-loss", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct Common {
    /// Master seed; trial i of every cell uses the substream mix(seed, i).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = one per CPU).
    #[arg(long, global = true, env = "TORIC_LOSS_WORKERS", default_value_t = 0)]
    workers: usize,
    /// Directory for CSV tables and the manifest.
    #[arg(long, short, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Failure rate of a single (L, p_loss, p_comp, tau) cell.
    Simulate(SimulateArgs),
    /// Failure-rate grid over lattice sizes, scaling collapse fit and
    /// pairwise crossing points.
    Threshold(ThresholdArgs),
    /// Threshold at each loss rate and a quadratic fit of the boundary.
    PhaseDiagram(PhaseDiagramArgs),
    /// Largest-superplaquette sweep, scaling fit and p_scale.
    Percolation(PercolationArgs),
    /// Lossless threshold as a function of the degeneracy weight tau.
    TauSweep(TauSweepArgs),
    /// Solver against brute-force enumeration, plus the relabeling test.
    OracleCheck(OracleCheckArgs),
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    /// Lattice size L.
    #[arg(long = "size", short = 'L')]
    size: usize,
    #[arg(long, default_value_t = 0.0)]
    p_loss: f64,
    #[arg(long)]
    p_comp: f64,
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum WeightingArg {
    InverseVariance,
    Uniform,
}

#[derive(Debug, Args, Serialize)]
struct GridArgs {
    /// Lattice sizes.
    #[arg(long, value_delimiter = ',', default_values_t = [8, 12, 16])]
    sizes: Vec<usize>,
    /// Explicit p_comp grid; by default seven points spaced 0.005 apart
    /// around the small-loss prediction for each loss rate.
    #[arg(long, value_delimiter = ',')]
    p_comp: Vec<f64>,
    #[arg(long, default_value_t = 7)]
    grid_points: usize,
    #[arg(long, default_value_t = 0.005)]
    grid_spacing: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, value_enum, default_value_t = WeightingArg::InverseVariance)]
    weighting: WeightingArg,
}

#[derive(Debug, Args, Serialize)]
struct ThresholdArgs {
    #[arg(long, default_value_t = 0.0)]
    p_loss: f64,
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    #[command(flatten)]
    grid: GridArgs,
    /// Bootstrap resamples for crossing-point errors.
    #[arg(long, default_value_t = 500)]
    resamples: usize,
}

#[derive(Debug, Args, Serialize)]
struct PhaseDiagramArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4])]
    p_loss: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args, Serialize)]
struct PercolationArgs {
    /// Sizes entering the scaling fit.
    #[arg(long, value_delimiter = ',', default_values_t = [8, 16, 32])]
    sizes: Vec<usize>,
    /// Loss rates for the scaling fit.
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45])]
    p_loss: Vec<f64>,
    /// Sizes for which p_scale is solved, on a fine grid over [0.3, 0.5].
    #[arg(long, value_delimiter = ',', default_values_t = [16, 24])]
    scale_sizes: Vec<usize>,
    #[arg(long, default_value_t = 1_000)]
    trials: u64,
}

#[derive(Debug, Args, Serialize)]
struct TauSweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0])]
    taus: Vec<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args, Serialize)]
struct OracleCheckArgs {
    #[arg(long, default_value_t = 1_000)]
    instances: usize,
    /// Largest lattice size drawn.
    #[arg(long, default_value_t = 6)]
    max_size: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.2])]
    p_loss: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0])]
    taus: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
