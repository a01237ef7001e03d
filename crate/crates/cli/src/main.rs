//! `g2lab` command-line driver.
//!
//! Every command prints a one-line summary to stdout and writes its
//! machine-readable output under `--out` (default: the working directory).
//! Exit codes: 0 when every target is met, 2 when the run completed but
//! some target was missed, 1 on invalid input or a failed precondition.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "g2lab", version, about = "G₂ forms, cone models and monopole solves")]
struct Cli {
    /// Directory for JSON/CSV artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized exterior-algebra invariant suite.
    AlgebraCheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
    /// Metric, coassociative form and volume of a 3-form.
    G2Derive {
        /// Family name or form file.
        #[arg(long, default_value = "euclidean")]
        phi: String,
        /// Evaluation point for polynomial forms, comma separated.
        #[arg(long, value_delimiter = ',')]
        at: Option<Vec<f64>>,
    },
    /// Linear map `L` with `L*φ = φ₀`.
    Normalize {
        #[arg(long)]
        phi: String,
        #[arg(long, value_delimiter = ',')]
        at: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Instanton defect and chart consistency of a cone model.
    InstantonCheck {
        /// `canonical`, `flat` or a linear model file.
        #[arg(long, default_value = "canonical")]
        model: String,
        /// Bundle rank for the flat model.
        #[arg(long, default_value_t = 6)]
        rank: usize,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Rescaled deviation bounds and residual covariance.
    RescaleCheck {
        #[arg(long)]
        phi: String,
        #[arg(long)]
        lambda: f64,
        /// The universal constant in `c_φ`.
        #[arg(long = "C", default_value_t = 1.0)]
        constant: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        points: usize,
    },
    /// Radial monopole solve from a key = value config.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Decay exponent of a decay-table CSV.
    DecayFit {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(e) = commands::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match commands::run(&cli.command, &cli.out) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
