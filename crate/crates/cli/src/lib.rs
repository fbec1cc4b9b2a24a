//! Scenario catalogue, frequency sweeps and result files for the
//! `floquet-tfim` command-line tool.

pub mod commands;
pub mod error;
pub mod output;
pub mod scenarios;
pub mod sweep;

pub use error::{CliError, Result};
