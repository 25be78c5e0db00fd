//! Batch pipeline commands and the HTTP JSON service for `cfexplain`.

pub mod cli;
pub mod files;
pub mod server;

pub use cli::{run, Cli, CliError};
