//! Command-line front end: argument definitions, input parsing, and
//! report rendering. `main.rs` only maps results to exit codes.

pub mod args;
pub mod commands;
pub mod input;
pub mod render;

pub use args::Cli;
pub use commands::{run, CliError};
pub use input::parse_sample_file;

/// Version of the JSON documents written by every subcommand.
pub const SCHEMA_VERSION: u32 = 1;
