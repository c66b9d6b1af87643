//! Command-line front end for boostlab: data ingestion, replication recipes,
//! training and prediction, and statistical reports.

pub mod analyses;
pub mod args;
pub mod commands;
pub mod error;
pub mod load;
pub mod plan;
pub mod report;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::Cli;
pub use error::{CliError, Result};

/// Parses and runs; returns the process exit code (0 ok, 1 runtime error,
/// 2 invalid invocation or configuration).
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
