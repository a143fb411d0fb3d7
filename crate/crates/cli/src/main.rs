use std::path::PathBuf;
use std::process;

use clap::{Parser, Subcommand};

use relaxtrace_cli::{run_estimate, run_generate, run_likelihood_grid, run_qubit_sweep};

/// Reconstruct effective relaxation dynamics from tomographic snapshots.
#[derive(Parser)]
#[command(name = "relaxtrace", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic experiment from a JSON config file.
    Generate {
        /// Experiment config (JSON).
        config: PathBuf,
        /// Output experiment file.
        #[arg(long)]
        out: PathBuf,
        /// Override the config's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Reconstruct the relaxation curve from an experiment file.
    Estimate {
        /// Input experiment file.
        #[arg(long = "in", value_name = "EXPERIMENT")]
        input: PathBuf,
        /// Output result file.
        #[arg(long)]
        out: PathBuf,
        /// Mix each image with ε·I/d before estimation; giving the flag
        /// without a value uses ε = 1e-8.
        #[arg(long, value_name = "EPSILON", num_args = 0..=1, default_missing_value = "1e-8")]
        regularize: Option<f64>,
    },
    /// Tabulate the qubit tilting angle against its small-radius approximation.
    QubitSweep {
        /// Number of grid points (at least 2).
        #[arg(long)]
        points: usize,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the log-likelihood over a fixed grid of directions.
    LikelihoodGrid {
        /// Input experiment file.
        #[arg(long = "in", value_name = "EXPERIMENT")]
        input: PathBuf,
        /// Number of grid directions.
        #[arg(long)]
        directions: usize,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate { config, out, seed } => run_generate(&config, &out, seed),
        Command::Estimate {
            input,
            out,
            regularize,
        } => run_estimate(&input, &out, regularize),
        Command::QubitSweep { points, out } => run_qubit_sweep(points, &out),
        Command::LikelihoodGrid {
            input,
            directions,
            out,
        } => run_likelihood_grid(&input, directions, &out),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err}");
        process::exit(err.exit_code());
    }
}
