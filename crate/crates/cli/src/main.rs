mod args;
mod bench;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::commands::Outcome;

/// Exit status for invalid flags, bad input files and I/O failures.
const USAGE_ERROR: u8 = 1;
/// Exit status when a solve stopped short of the gradient tolerance.
const NOT_CONVERGED: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // --help and --version land here too
            return if err.use_stderr() { ExitCode::from(USAGE_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Solve(args) => commands::solve(args),
        Command::Bench(args) => commands::bench(args),
        Command::Mesh(args) => commands::mesh(args),
    };
    match result {
        Ok(Outcome::Converged) => ExitCode::SUCCESS,
        Ok(Outcome::NotConverged) => ExitCode::from(NOT_CONVERGED),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}
