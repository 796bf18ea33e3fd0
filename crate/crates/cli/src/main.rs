//! `vspace`: check, solve and analyze violator spaces from the command line.
//!
//! Exit codes: 0 success, 1 axiom or orientation witness, 2 parse or usage
//! error, 3 solver error, 4 size guard.

mod commands;
mod load;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::load::CliError;

/// Seed used when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 20_080_101;

#[derive(Debug, Parser)]
#[command(name = "vspace", version, about = "Violator spaces: axiom checks, structure, and Clarkson-style solvers")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Trivial,
    Clarkson1,
    Clarkson2,
    /// Clarkson's first algorithm on the full ground set.
    Auto,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Trivial => "trivial",
            Algo::Clarkson1 => "clarkson1",
            Algo::Clarkson2 => "clarkson2",
            Algo::Auto => "auto",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UsoKind {
    /// Uniform over unique sink orientations, by rejection.
    Random,
    /// Edges toward lower rank in each block, random rankings.
    Coordinate,
    /// The fixed cyclic 2x2x2 orientation.
    CyclicCube,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the axioms of a file (or unique sinks for a grid orientation).
    Check { path: PathBuf },
    /// Compute a basis of the whole ground set.
    Solve {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Auto)]
        algo: Algo,
        /// Override the combinatorial-dimension bound.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        delta: Option<u64>,
    },
    /// Bases, equivalence classes, cyclicity and the concrete representation.
    Structure { path: PathBuf },
    /// Grid unique sink orientations.
    Uso {
        #[command(subcommand)]
        command: UsoCommand,
    },
    /// Mean primitive calls on random coordinate-order grid orientations.
    Bench {
        #[arg(long, default_value_t = 2)]
        delta: usize,
        #[arg(long, value_delimiter = ',', default_values_t = vec![64, 128, 256, 512])]
        sizes: Vec<usize>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![Algo::Trivial, Algo::Clarkson1, Algo::Clarkson2])]
        algos: Vec<Algo>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
    /// Compare the mean violator count of random samples with its bound.
    Sampling {
        path: PathBuf,
        /// Sample size.
        #[arg(long)]
        r: usize,
        /// Names of a fixed set joined to every sample.
        #[arg(long, value_delimiter = ',')]
        w: Vec<String>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        delta: Option<u64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum UsoCommand {
    /// Emit a grid orientation as JSON.
    Generate {
        /// Block sizes, e.g. `3x2x2`.
        #[arg(long)]
        shape: Option<String>,
        #[arg(long, value_enum, default_value_t = UsoKind::Random)]
        kind: UsoKind,
        #[arg(long, default_value_t = 100_000)]
        max_attempts: u64,
    },
    /// Emit the induced explicit violator space as JSON.
    Tabulate { path: PathBuf },
    /// The global sink, by exhaustive scan.
    Sink { path: PathBuf },
    /// Search random orientations for a cyclic induced violator space.
    /// With two blocks this probes whether dimension 2 admits cycles.
    Probe {
        #[arg(long, default_value = "3x3")]
        shape: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 100_000)]
        max_attempts: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = commands::run(&cli).and_then(|o| {
        match &cli.out {
            Some(path) => std::fs::write(path, &o.text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?,
            None => print!("{}", o.text),
        }
        Ok(o.code)
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
