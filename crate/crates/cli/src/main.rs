//! `simcontract`: check simulation and contract relations stored in a model file.
//!
//! Exit codes: 0 when the verdict is true, 1 when it is false, 2 on usage,
//! parse or validation errors, 3 on dimension mismatches between operands.

mod commands;
mod error;
mod model;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use simcontract::oracle::TrajectoryConfig;

use commands::{CheckKind, ToleranceFlags};

#[derive(Parser)]
#[command(
    name = "simcontract",
    version,
    about = "Simulation and assume-guarantee contract checks for linear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Print a machine-readable JSON report.
    #[arg(long)]
    json: bool,
    /// Relative singular-value cutoff for rank decisions.
    #[arg(long, env = "SIMCONTRACT_TOL_RANK", value_name = "TOL")]
    tol_rank: Option<f64>,
    /// Cutoff on subspace inclusion residuals.
    #[arg(long, env = "SIMCONTRACT_TOL_INCL", value_name = "TOL")]
    tol_incl: Option<f64>,
}

impl Common {
    fn tolerance(&self) -> ToleranceFlags {
        ToleranceFlags {
            rank_rel: self.tol_rank,
            inclusion: self.tol_incl,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide a simulation or contract relation.
    Check {
        kind: CheckKind,
        file: PathBuf,
        #[arg(required = true)]
        operands: Vec<String>,
        /// Print the relation basis of every sub-check.
        #[arg(long)]
        witness: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Write the series composition of two contracts to a new model file.
    Compose {
        file: PathBuf,
        first: String,
        second: String,
        #[arg(short, long, value_name = "PATH")]
        output: PathBuf,
        /// Name of the composed contract [default: FIRST->SECOND].
        #[arg(long)]
        name: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the consistent subspace of a constrained or guarantee system.
    Inspect {
        file: PathBuf,
        system: String,
        /// Also compute the dimension in exact rational arithmetic.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Recompute a check and confirm its relations on simulated trajectories.
    Validate {
        kind: CheckKind,
        file: PathBuf,
        #[arg(required = true)]
        operands: Vec<String>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        /// Seconds.
        #[arg(long, default_value_t = 5.0)]
        horizon: f64,
        /// Seconds.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<u8, error::CliError> {
    match cli.command {
        Command::Check {
            kind,
            file,
            operands,
            witness,
            common,
        } => commands::check(commands::CheckArgs {
            kind,
            file: &file,
            operands: &operands,
            witness,
            json: common.json,
            tol: common.tolerance(),
        }),
        Command::Compose {
            file,
            first,
            second,
            output,
            name,
            common,
        } => commands::compose(commands::ComposeArgs {
            file: &file,
            first: &first,
            second: &second,
            output: &output,
            name: name.as_deref(),
            json: common.json,
            tol: common.tolerance(),
        }),
        Command::Inspect {
            file,
            system,
            exact,
            common,
        } => commands::inspect(commands::InspectArgs {
            file: &file,
            system: &system,
            exact,
            json: common.json,
            tol: common.tolerance(),
        }),
        Command::Validate {
            kind,
            file,
            operands,
            trials,
            horizon,
            dt,
            seed,
            common,
        } => commands::validate(commands::ValidateArgs {
            kind,
            file: &file,
            operands: &operands,
            json: common.json,
            tol: common.tolerance(),
            config: TrajectoryConfig {
                trials,
                horizon,
                dt,
                seed,
                ..TrajectoryConfig::default()
            },
        }),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
