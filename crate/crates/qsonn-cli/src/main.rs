//! `qsonn`: train, evaluate and benchmark lightweight operational
//! speech-command models.
//!
//! Exit codes: 0 success, 1 configuration or data errors, 2 failed gradient
//! verification.

mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qsonn",
    version,
    about = "Quadratic self-organized operational layers for speech command recognition",
    long_about = "Trains and compares three layer families (ordinary convolution, power-series \
                  SelfONN, quadratic SelfONN) on 10-command keyword spotting.\n\
                  Option precedence: command-line flags override config-file values, which \
                  override the built-in defaults shown in each flag's help."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a dataset tree and build the MFCC feature cache
    Preprocess(commands::preprocess::Args),
    /// Train a model on a prepared feature cache
    Train(commands::train::Args),
    /// Report a checkpoint's accuracy on one split
    Eval(commands::eval::Args),
    /// Verify analytic gradients against 64-bit finite differences
    Gradcheck(commands::gradcheck::Args),
    /// Print per-layer parameter/MAC tables and measure inference latency
    Bench(commands::bench::Args),
    /// Train across Q values and tabulate accuracy versus Q
    SweepQ(commands::sweep::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Preprocess(args) => commands::preprocess::run(args).map(|()| ExitCode::SUCCESS),
        Command::Train(args) => commands::train::run(args).map(|()| ExitCode::SUCCESS),
        Command::Eval(args) => commands::eval::run(args).map(|()| ExitCode::SUCCESS),
        Command::Gradcheck(args) => commands::gradcheck::run(args),
        Command::Bench(args) => commands::bench::run(args).map(|()| ExitCode::SUCCESS),
        Command::SweepQ(args) => commands::sweep::run(args).map(|()| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
