//! Command-line front end for the `kerr_dimer` toolkit: configuration parsing,
//! sweep orchestration and CSV artifacts.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Report};
pub use config::{parse_config, Command, RunConfig};
pub use error::{CliError, CliResult};
