//! Command implementations; each returns the process exit code.

pub mod bound;
pub mod dla;
pub mod rank;
pub mod sweep;
pub mod train;

use crate::config::ConfigError;

/// Sub-stream tags for per-cell RNG derivation.
pub(crate) mod stream {
    pub const DATA: u64 = 1;
    pub const THETA0: u64 = 2;
    pub const TEST: u64 = 3;
    pub const TARGET: u64 = 4;
}

#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    Core(dqfim::Error),
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e)
    }
}

impl From<dqfim::Error> for CommandError {
    fn from(e: dqfim::Error) -> Self {
        CommandError::Core(e)
    }
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::Config(e) => write!(f, "{e}"),
            CommandError::Core(e) => write!(f, "{e}"),
        }
    }
}

pub type CmdResult = Result<i32, CommandError>;

pub(crate) fn experiment_id(cmd: &str, family: &str, n: usize, seed: u64) -> String {
    format!("{cmd}-{family}-n{n}-s{seed}")
}
