use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;

use args::{Cli, Command};

/// Exit status for bad input.
const EXIT_INVALID: u8 = 2;
/// Exit status when a search or the reference oracle does not converge.
const EXIT_UNCONVERGED: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Price(a) => commands::price(a),
        Command::Converge(a) => commands::converge(a),
        Command::Bench(a) => commands::bench(a),
        Command::Diagnose(a) => commands::diagnose(a),
    };
    match outcome {
        Ok(commands::Status::Done) => ExitCode::SUCCESS,
        Ok(commands::Status::Unconverged) => ExitCode::from(EXIT_UNCONVERGED),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use fourier_pricing::PricingError as E;
    match err.downcast_ref::<E>() {
        Some(E::NoConvergence { .. } | E::AgreementFailure { .. }) => EXIT_UNCONVERGED,
        Some(_) => EXIT_INVALID,
        None if err.is::<args::UsageError>() => EXIT_INVALID,
        None => 1,
    }
}
