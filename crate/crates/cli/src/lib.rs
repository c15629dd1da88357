//! Batch front end for the `frobrace` library: configuration, subcommands,
//! CSV artifacts and the exit-code contract.

pub mod commands;
pub mod config;
pub mod output;
pub mod pipeline;
pub mod validate;

use thiserror::Error;

pub use commands::{run, Command, Outcome};
pub use config::Config;

pub const EXIT_INVALID: i32 = 2;
pub const EXIT_MISSING: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] frobrace::Error),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use frobrace::Error as E;
        match self {
            CliError::Config(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_MISSING,
            CliError::Core(e) => match e {
                E::InvalidParameter(_) | E::Precondition(_) | E::Parse { .. } => EXIT_INVALID,
                E::MissingData(_) | E::Io(_) => EXIT_MISSING,
                E::Invariant(_) => EXIT_INVARIANT,
            },
        }
    }
}
