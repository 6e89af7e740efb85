//! Configuration, report tables and the subcommands behind the `cyclic-dce`
//! binary.

use std::io;
use std::path::{Path, PathBuf};

mod commands;
mod config;
mod table;

pub use commands::{cmd_evolve, cmd_rates, cmd_scan, cmd_spectrum, timeseries_table, EvolveReport, DROP_FRACTION};
pub use config::{GridConfig, Initial, Mode, OutputConfig, Overrides, RunConfig, SpaceConfig};
pub use table::{Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(#[source] cyclic_dce::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.to_owned(), source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<cyclic_dce::Error> for CliError {
    fn from(e: cyclic_dce::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}
