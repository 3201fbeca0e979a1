//! `qanneal`: command-line front end.
//!
//! Exit codes: 0 success, 1 other failure, 2 input parse error, 3 embedding
//! failure, 4 problem too large for exact enumeration.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use qanneal_core::Error;

use args::{Cli, Command};

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 2,
        Error::EmbeddingFailure { .. } => 3,
        Error::TooLarge { .. } => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let ctx = commands::Context {
        timestamp: !cli.no_timestamp,
    };
    let result = match &cli.command {
        Command::Solve(a) => commands::solve(&ctx, a),
        Command::Embed(a) => commands::embed(&ctx, a),
        Command::Mle(a) => commands::mle(&ctx, a),
        Command::Design(a) => commands::design(&ctx, a),
        Command::Matinv(a) => commands::matinv(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
