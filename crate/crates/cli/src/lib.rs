//! Library side of the `urnlab` binary, exposed for integration tests.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{run, EXIT_FAILED, EXIT_OK, EXIT_USAGE};
pub use config::{Cli, RunConfig};
