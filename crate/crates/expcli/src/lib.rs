//! Library side of the experiment CLI, so integration tests can drive the
//! commands directly.

pub mod cli;
pub mod commands;
pub mod config;
pub mod rows;

/// Process exit codes, fixed as part of the CLI contract.
pub mod exit_codes {
    pub const OK: i32 = 0;
    pub const CONFIG_ERROR: i32 = 1;
    pub const NO_PLATEAU: i32 = 2;
    pub const TRUNCATED_CLOSURE: i32 = 3;
    pub const SWEEP_PARTIAL: i32 = 4;
}

/// Maps an error bubbling out of a command to its exit code.
pub fn exit_code_for(err: &dqfim::Error) -> i32 {
    match err {
        dqfim::Error::NoPlateau { .. } | dqfim::Error::NoPlateauInL { .. } => {
            exit_codes::NO_PLATEAU
        }
        dqfim::Error::TruncatedSpan { .. } => exit_codes::TRUNCATED_CLOSURE,
        _ => exit_codes::CONFIG_ERROR,
    }
}
