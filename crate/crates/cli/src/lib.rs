//! Library side of the `nlbeat` command-line tool: configuration, angle
//! syntax, output files with provenance headers, and the subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod output;

pub use commands::{execute, Artifact};
pub use config::{Cli, OutputFormat, RunConfig};
pub use error::CliError;
