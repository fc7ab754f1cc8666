//! Command-line front end for `desmoke-core`.

pub mod args;
pub mod batch;
pub mod commands;
pub mod error;
pub mod trace;

use std::io::Write;

pub use args::{Cli, Command};
pub use error::CliError;

pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<(), CliError> {
    match &cli.command {
        Command::Desmoke(a) => commands::cmd_desmoke(a, out),
        Command::Metrics(a) => commands::cmd_metrics(a, out),
        Command::Synth(a) => commands::cmd_synth(a, out),
        Command::Batch(a) => batch::cmd_batch(a, out),
    }
}
