//! `devcert`: certify the maximum deviation of a model from a reference.
//!
//! Exit codes: 0 success, 1 usage or unsupported model pair, 2 parse or
//! schema error, 3 violated assumption, 4 budget expired (bounds are still
//! written).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod common;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use devcert_core::Error;

#[derive(Parser)]
#[command(
    name = "devcert",
    version,
    about = "Maximum deviation certification for interpretable models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certify the maximum deviation of a model from a reference model.
    Certify(commands::CertifyArgs),
    /// Certify over a range of ball radii.
    Sweep(commands::SweepArgs),
    /// Maximum deviation per leaf of the reference tree.
    Breakdown(commands::BreakdownArgs),
    /// Feature contributions at a maximizer of an additive model.
    Contrib(commands::ContribArgs),
    /// Robust accuracy of an additive classifier under l-infinity perturbations.
    RobustAcc(commands::RobustAccArgs),
    /// Maximize the deviation of a black-box model by querying it.
    Blackbox(commands::BlackboxArgs),
    /// Convert a rule list to a tree or a rule ensemble to a tree ensemble.
    Convert(commands::ConvertArgs),
    /// Check model files against the schema and model invariants.
    Validate(commands::ValidateArgs),
}

/// Options shared by the certifying commands.
#[derive(Args, Clone)]
pub struct PairArgs {
    /// Model file of the model under test.
    #[arg(long)]
    pub model: PathBuf,
    /// Model file of the reference model.
    #[arg(long)]
    pub reference: PathBuf,
    /// `full`, `points:FILE.csv` or `balls:FILE.csv:r=R[:p=inf|1|2]`.
    #[arg(long, default_value = "full")]
    pub certset: String,
    /// `abs` or `pow:P`.
    #[arg(long, default_value = "abs")]
    pub deviation: String,
    #[arg(long, value_enum, default_value_t = ScaleArg::Prob)]
    pub scale: ScaleArg,
    /// Wall-clock limit in seconds for anytime searches.
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Node limit for anytime searches.
    #[arg(long)]
    pub node_limit: Option<u64>,
    /// Print one JSON line per bound improvement to stderr.
    #[arg(long)]
    pub stream: bool,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ScaleArg {
    Prob,
    Link,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_) | Error::UnsupportedPair(_) | Error::BudgetTooSmall { .. } => 1,
        Error::Parse(_)
        | Error::Schema(_)
        | Error::Version { .. }
        | Error::MissingStats(_)
        | Error::SchemaMismatch(_)
        | Error::Io(_) => 2,
        Error::AssumptionViolated(_)
        | Error::UnsupportedNorm(_)
        | Error::AbstainUnconfigured
        | Error::UnsupportedCondition(_)
        | Error::EmptyCertSet
        | Error::EmptyRegion
        | Error::OracleFailure(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Certify(a) => commands::certify(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Breakdown(a) => commands::breakdown(a),
        Command::Contrib(a) => commands::contrib(a),
        Command::RobustAcc(a) => commands::robust_acc(a),
        Command::Blackbox(a) => commands::blackbox(a),
        Command::Convert(a) => commands::convert(a),
        Command::Validate(a) => commands::validate(a),
    };
    match outcome {
        Ok(commands::Outcome::Done) => ExitCode::SUCCESS,
        Ok(commands::Outcome::BudgetExpired) => {
            eprintln!("devcert: budget expired; reported bounds are not tight");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("devcert: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
