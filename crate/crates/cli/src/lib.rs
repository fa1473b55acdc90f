//! Command-line front end for the `gapnet` library.
//!
//! Every command writes its reports plus a `manifest.json` into the output
//! directory. Errors go to stderr as one JSON object; the exit code is 0 on
//! success, 2 for invalid input and 3 when training or evaluation fails.

pub mod args;
pub mod cmd;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;

use std::ffi::OsString;

use clap::Parser;

use args::{Cli, Command};
pub use error::{CliError, CliResult, ErrorKind};

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = CliError::validation(e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("{}", err.to_json());
            err.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Synth(c) => cmd::synth::run(c).map(drop),
        Command::Clusters(c) => cmd::clusters::run(c).map(drop),
        Command::Train(c) => cmd::train::run(c).map(drop),
        Command::Benchmark(c) => cmd::benchmark::run(c).map(drop),
        Command::Importance(c) => cmd::importance::run(c).map(drop),
    }
}
