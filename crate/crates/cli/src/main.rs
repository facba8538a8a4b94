//! `crn`: reduce stochastic reaction networks, compute stationary
//! distributions and scaling limits, and simulate.
//!
//! Exit codes: 0 ok, 1 validation or usage, 2 IO, 3 condition violation,
//! 4 component error, 5 simulation guard.

mod commands;
mod inputs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use crn_core::num::NumericMode;
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "crn", version, about = "Elimination of non-interacting species in stochastic reaction networks")]
pub struct Cli {
    /// Arithmetic for linear solves.
    #[arg(long, global = true, env = "CRN_NUMERIC_MODE", default_value = "rational")]
    pub mode: NumericMode,
    /// Write the JSON result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and check a network file.
    Validate(ValidateArgs),
    /// Eliminate a set of non-interacting species.
    Reduce(ReduceArgs),
    /// Stationary distribution on an irreducible component.
    Stationary(StationaryArgs),
    /// Scaled distributions and their limit as N grows.
    Limit(LimitArgs),
    /// Gillespie simulation of the full or reduced network.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SetArgs {
    /// Species to eliminate, comma separated.
    #[arg(long)]
    pub u: Option<String>,
    /// Name of a species set declared in the file.
    #[arg(long)]
    pub set: Option<String>,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    pub file: PathBuf,
    /// Check rate expressions on every state of the box [0, N]^n.
    #[arg(long, default_value_t = 6)]
    pub probe_box: u64,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub set: SetArgs,
    /// Memo entry cap for the walk-sum search.
    #[arg(long, default_value_t = crn_core::elimination::DEFAULT_MEMO_CAP)]
    pub cap: usize,
    /// Evaluate the reduced intensities at a core state (`A=1,B=2` or `1,2`).
    #[arg(long = "eval")]
    pub eval: Vec<String>,
}

#[derive(Args, Debug)]
pub struct StationaryArgs {
    pub file: PathBuf,
    /// Starting state of the component (`A=2,B=0` or `2,0`).
    #[arg(long)]
    pub seed_state: String,
    /// `sum:T`, `box:M` or `box:M1,M2,...`, or `linear:W1,W2,...:T`.
    #[arg(long)]
    pub bound: Option<String>,
    /// Work with the reduced network instead of the full one.
    #[arg(long)]
    pub reduced: bool,
    #[command(flatten)]
    pub set: SetArgs,
}

#[derive(Args, Debug)]
pub struct LimitArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub set: SetArgs,
    /// Exponents per eliminated species (`1`, `1,2` or `U=1`); defaults to
    /// the file's scaling block, then to 1.
    #[arg(long)]
    pub beta: Option<String>,
    /// Increasing list of N.
    #[arg(long, default_value = "1,2,4,8,16,32,64,128,256,512,1024")]
    pub ns: String,
    #[arg(long)]
    pub seed_state: String,
    #[arg(long)]
    pub bound: Option<String>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub x0: String,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Simulate the reduced network (core species only).
    #[arg(long)]
    pub reduced: bool,
    #[command(flatten)]
    pub set: SetArgs,
    /// Simulate the scaled network with this N (uses --beta).
    #[arg(long)]
    pub scale_n: Option<u64>,
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub replicas: usize,
    #[arg(long, default_value_t = 0.0)]
    pub burn_in: f64,
    #[arg(long, default_value_t = crn_core::simulate::DEFAULT_MAX_JUMPS)]
    pub max_jumps: usize,
    /// Report the occupation measure projected onto these species.
    #[arg(long)]
    pub project: Option<String>,
    /// Write the first replica's trajectory as CSV.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

/// A failed command: exit code, message and optional JSON detail.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
    pub detail: Option<Value>,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            detail: None,
        }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(1, message)
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }
}

fn write_json(value: &Value, output: Option<&PathBuf>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialize") + "\n";
    match output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::new(2, format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = commands::run(&cli).and_then(|v| write_json(&v, cli.output.as_ref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            if let Some(detail) = &f.detail {
                let _ = write_json(detail, cli.output.as_ref());
            }
            ExitCode::from(f.code)
        }
    }
}
