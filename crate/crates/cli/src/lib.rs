//! Command-line front end for the conformable thermistor solver.
//!
//! The binary is a thin wrapper around [`commands`]; everything that decides
//! an exit code or produces output bytes lives here so it can be tested
//! without spawning processes.

pub mod commands;
pub mod config;
pub mod error;
pub mod identities;

pub use config::Config;
pub use error::{CliError, CliResult};

/// Outcome of a command that ran to completion. The ordering is by
/// severity, so the worst of several outcomes is their maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    NotConverged,
    TubeRejected,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::NotConverged => 2,
            Status::TubeRejected => 3,
        }
    }
}

/// Exit code for unreadable or invalid configuration, bad flags and
/// model errors such as a source that is not strictly positive.
pub const EXIT_CONFIG: u8 = 4;
