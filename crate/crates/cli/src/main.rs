mod commands;
mod objects;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use output::Format;

/// Thermodynamic worth of non-equilibrium resources: deviation from
/// equilibrium, conversion order, cooling limits and the erasure protocol.
#[derive(Debug, Clone, Parser)]
#[command(name = "thermocool", version)]
pub struct RunConfig {
    /// JSON objects file.
    #[arg(long, global = true, value_name = "PATH")]
    objects: Option<String>,
    /// Output format; tables default to csv, reports to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Overrides the reference inverse temperature of the objects file.
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Boltzmann constant used for reported temperatures.
    #[arg(long, global = true, default_value_t = 1.0)]
    boltzmann: f64,
    /// Cap on exhaustive enumerations.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    cap: u128,
    /// Cap on dense matrix dimensions.
    #[arg(long, global = true, default_value_t = 512)]
    matrix_cap: u128,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Maximal diagonal deviation from equilibrium.
    Deviation {
        #[arg(long)]
        name: String,
        /// Tabulate D(O^n)/n for n = 1..=N.
        #[arg(long)]
        nfold: Option<usize>,
    },
    /// Limit temperatures for a qubit of gap E, optionally with a cooling verdict.
    Limits {
        #[arg(long)]
        name: String,
        #[arg(long)]
        gap: f64,
        /// Inverse temperature of the qubit to judge.
        #[arg(long)]
        qubit_beta: Option<f64>,
    },
    /// Decide whether one object converts into another.
    Convert {
        #[command(flatten)]
        pair: Pair,
        /// Certify with exact rational arithmetic.
        #[arg(long)]
        exact: bool,
    },
    /// Relative-entropy audit against the perfectly initialized bit.
    Landauer {
        #[arg(long)]
        name: String,
        #[arg(long, default_value_t = 1)]
        n: u64,
        /// Use this object as the target instead of the erased bit.
        #[arg(long)]
        to: Option<String>,
    },
    /// Lowest qubit temperatures T_n reachable with n copies.
    Cool {
        #[arg(long)]
        name: String,
        #[arg(long)]
        gap: f64,
        #[arg(long, default_value_t = 32)]
        nmax: usize,
    },
    /// Optimal energy-shell sorting against a thermal qubit.
    Shellsort {
        #[arg(long)]
        name: String,
        #[arg(long, alias = "gap")]
        qubit_gap: f64,
        #[arg(long)]
        qubit_beta: f64,
        /// Also try this many seeded random energy-conserving unitaries on the sorted state.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Exact simulation of the ancilla-assisted conversion protocol.
    ErasureSim {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        n: Vec<usize>,
    },
    /// Deviation vectors and relative inverse temperatures of composed copies.
    Geometry {
        #[arg(long)]
        name: String,
        #[arg(long)]
        gap: Option<f64>,
        #[arg(long, default_value_t = 1)]
        copies: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Pair {
    #[arg(long)]
    from: String,
    #[arg(long)]
    to: String,
}

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match commands::run(&config) {
        Ok(text) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code as u8)
        }
    }
}
