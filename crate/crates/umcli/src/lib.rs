//! Command-line front end for the `ultragen` crate.

pub mod cli;
pub mod config;
pub mod experiment;

use std::ffi::OsString;

use clap::Parser;

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code: 0 on success, 1 when a check finds the input
/// invalid, 2 for usage, configuration and I/O errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match cli::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match cli::execute(parsed) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            cli::exit_code(&e)
        }
    }
}
