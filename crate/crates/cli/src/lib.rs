//! Command-line front end for `secrev-core`.
//!
//! Exit status: 0 on success, 1 when some entries failed but the command
//! finished, 2 on a fatal error.

mod args;
mod commands;
mod config;
mod io;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::Cli;
pub use config::{FileConfig, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ENTRY_ERRORS: i32 = 1;
pub const EXIT_FATAL: i32 = 2;

/// Result of a completed command.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Outcome {
    pub entry_errors: usize,
}

/// Parses `argv` and runs the command, writing reports to `out` and
/// diagnostics to `err`. Returns the process exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_FATAL;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match commands::dispatch(cli, out) {
        Ok(o) if o.entry_errors == 0 => EXIT_OK,
        Ok(o) => {
            let _ = writeln!(err, "secrev: {} entr{} failed", o.entry_errors, if o.entry_errors == 1 { "y" } else { "ies" });
            EXIT_ENTRY_ERRORS
        }
        Err(e) => {
            let _ = writeln!(err, "secrev: {e:#}");
            EXIT_FATAL
        }
    }
}
