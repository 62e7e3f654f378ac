//! `tradeoff`: batch front end for trade-off curves, channel simulation and
//! coding audits. Tables go to stdout or `--output`; a JSON manifest goes
//! next to the output file or to `--manifest`.

mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "tradeoff",
    version,
    about = "Quantum-classical trade-off curves for visible compression"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, env = "TRADEOFF_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// CSV destination (default: stdout).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Manifest destination (default: <output>.manifest.json, none for stdout).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Sample M(E, R) over [0, H(p)].
    Curve(CurveArgs),
    /// One value of M, X or N.
    Point(PointArgs),
    /// Worst-case M over a convex set of priors.
    Avs(AvsArgs),
    /// Blind compression rate and the irreducible components.
    Blind(EnsembleArg),
    /// Combine two curve files under the tensor rule.
    Tensor(TensorArgs),
    /// Closed-form uniform-qubit curve, optionally against a discretized solve.
    UniformQubit(UniformArgs),
    /// Simulate a classical channel with shared randomness.
    SimulateRst(RstArgs),
    /// Fidelity audit of the block code for an encoding kernel.
    AuditCoding(AuditArgs),
    /// Exhaustive reference values for small sources.
    Oracle(OracleArgs),
}

#[derive(Args, Debug, Serialize)]
struct EnsembleArg {
    /// Ensemble JSON file.
    #[arg(long)]
    ensemble: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct CurveArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long, default_value_t = 41)]
    samples: usize,
    /// Simplex lattice resolution (default: chosen from the source size).
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
enum Quantity {
    /// Least qubit rate at classical rate R.
    M,
    /// R + M(E, R).
    X,
    /// Least qubit rate at total information R.
    N,
}

#[derive(Args, Debug, Serialize)]
struct PointArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long = "R", allow_negative_numbers = true)]
    rate: f64,
    #[arg(long, value_enum, default_value_t = Quantity::M)]
    quantity: Quantity,
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct AvsArgs {
    /// States of the source; its probabilities are ignored.
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long = "R")]
    rate: f64,
    /// Vertex prior, comma separated; repeat for more (default: all priors).
    #[arg(long)]
    vertex: Vec<String>,
    /// Use the file's transitive group: the supremum sits at the uniform prior.
    #[arg(long, conflicts_with = "vertex")]
    transitive: bool,
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
struct TensorArgs {
    #[arg(long)]
    first: PathBuf,
    #[arg(long)]
    second: PathBuf,
    #[arg(long, default_value_t = 41)]
    samples: usize,
}

#[derive(Args, Debug, Serialize)]
struct UniformArgs {
    /// Closed-form samples, or rates when --points is given.
    #[arg(long, default_value_t = 41)]
    samples: usize,
    /// Solve the ensemble of this many Bloch-sphere points at each rate.
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    from: f64,
    #[arg(long, default_value_t = 2.0)]
    to: f64,
}

#[derive(Args, Debug, Serialize)]
struct RstArgs {
    /// Binary symmetric channel with this flip probability.
    #[arg(long, conflicts_with = "channel")]
    bsc: Option<f64>,
    /// Channel JSON file: rows W(·|i).
    #[arg(long)]
    channel: Option<PathBuf>,
    /// Input law, comma separated (default: uniform).
    #[arg(long)]
    prior: Option<String>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 8)]
    panel: usize,
}

#[derive(Args, Debug, Serialize)]
struct AuditArgs {
    #[arg(long)]
    ensemble: PathBuf,
    /// Deterministic kernel i ↦ label, comma separated.
    #[arg(long, conflicts_with = "kernel")]
    labels: Option<String>,
    /// Kernel JSON file: rows p(·|i).
    #[arg(long)]
    kernel: Option<PathBuf>,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    delta: f64,
    #[arg(long, default_value_t = 2000)]
    draws: usize,
    #[arg(long, default_value_t = 8)]
    panel: usize,
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    #[arg(long)]
    ensemble: PathBuf,
    /// Rates, comma separated.
    #[arg(long = "R")]
    rates: String,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Output symbols (default: m + 1).
    #[arg(long)]
    symbols: Option<usize>,
    /// M or N.
    #[arg(long, value_enum, default_value_t = Quantity::M)]
    quantity: Quantity,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
