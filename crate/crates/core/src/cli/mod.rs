//! Command-line interface: `analyze`, `simulate`, `bound`, `eval` and `example`.
//!
//! Every report is JSON with a `schema` version, the fully resolved
//! configuration and the seed, so that feeding `config` back in reproduces
//! the run byte for byte.

pub mod build;
pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;

pub use build::{build, Built};
pub use config::{parse_protocol, parse_source, ExperimentConfig, FunctionSpec, Model, ProtocolSpec, SimKind, SourceSpec};

/// Version of the JSON report layout.
pub const SCHEMA: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "icdensity", version, about = "Information complexity density spectra and protocol simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output format.
    #[arg(long = "out", value_enum)]
    pub format: Option<OutFormat>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Source spec: dsbs:q, dsbs:q:k, copy:k, indep:k, indep:kx:ky or a JSON file.
    #[arg(long)]
    pub source: Option<String>,
    /// Tree protocol: constant, send-x, data-exchange, bsc:c, xor, noisy-exchange:c, appendix-a:n or a JSON file.
    #[arg(long = "tree")]
    pub tree: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact densities, spectra and information complexity of a protocol.
    Analyze {
        #[command(flatten)]
        inputs: Inputs,
        /// Protocol spec (alias of --tree).
        #[arg(long)]
        protocol: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
        /// Density whose spectrum is written in CSV mode.
        #[arg(long, default_value = "ic")]
        density: String,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo runs of a simulation protocol.
    Simulate {
        #[arg(long, value_enum)]
        protocol: Option<SimKind>,
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, env = "ICDENSITY_SEED")]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Bound evaluators.
    Bound {
        #[command(subcommand)]
        which: BoundCommand,
    },
    /// Simulation error against the analytic budget.
    Eval {
        #[arg(long, value_enum)]
        protocol: Option<SimKind>,
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value = "plugin")]
        mode: crate::eval::EvalMode,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, env = "ICDENSITY_SEED")]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Worked examples.
    Example {
        #[command(subcommand)]
        which: ExampleCommand,
    },
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Protocol spec (alias of --tree).
    #[arg(long)]
    pub protocol: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Subcommand)]
pub enum BoundCommand {
    /// Converse lower bound on the communication of any ε-simulation.
    Lower(BoundArgs),
    /// Budget of the full simulation at target error --eps.
    Upper(BoundArgs),
    /// `n·IC + √(nV)·Q⁻¹(ε)` and, for small n, the exact n-fold tail.
    SecondOrder(BoundArgs),
    /// Direct-product thresholds for n copies.
    DirectProduct(BoundArgs),
    /// Optimal type-II error and its upper bound (p, q, lambda from the config).
    Beta(BoundArgs),
}

#[derive(Debug, Subcommand)]
pub enum ExampleCommand {
    /// The four-region protocol with vanishing IC but linear communication.
    AppendixA {
        #[arg(long, default_value_t = 16)]
        n: u32,
        /// `auto` means 1/n³.
        #[arg(long, default_value = "auto")]
        eps: String,
        /// `auto` means 1/(4n²).
        #[arg(long, default_value = "auto")]
        eta: String,
        #[command(flatten)]
        output: Output,
    },
    /// Coin-mixed protocol: send-x on DSBS(q) with probability p, nothing otherwise.
    Mixed {
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0.4)]
        q: f64,
        #[arg(long, default_value_t = 20_000)]
        draws: usize,
        #[arg(long, env = "ICDENSITY_SEED")]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Densities of a doubly symmetric binary source and of sending X.
    Dsbs {
        #[arg(long, default_value_t = 0.25)]
        q: f64,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[command(flatten)]
        output: Output,
    },
}

/// Exit status for an error: 2 for invalid input, 1 for failures at run time.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidConfig(_)
        | Error::ParameterRange(_)
        | Error::OutOfRange(_)
        | Error::InvalidDistribution(_)
        | Error::AlphabetMismatch(_)
        | Error::InvalidProtocol(_)
        | Error::MismatchedSupport
        | Error::SupportViolation
        | Error::Json(_) => 2,
        _ => 1,
    }
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match commands::dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
