//! Command implementations behind the `equimap` binary.
//!
//! Exit codes: 0 success, 1 a `check` suite reported a failure, 2 usage or
//! input error, 3 profile outside the projection regime, 4 numerical abort.

pub mod commands;
pub mod manifest;

use std::fmt;

/// Error carrying the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_REGIME: u8 = 3;
pub const EXIT_ABORT: u8 = 4;

impl Failure {
    pub fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure { code, error: error.into() }
    }
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Failure::new(EXIT_USAGE, error)
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &equimap::Error) -> u8 {
    use equimap::Error::*;
    match e {
        OutsideProjectionRegime { .. } | ScaleOutOfRange { .. } => EXIT_REGIME,
        NonConvergence { .. } | NumericalAbort { .. } => EXIT_ABORT,
        _ => EXIT_USAGE,
    }
}

impl From<equimap::Error> for Failure {
    fn from(e: equimap::Error) -> Self {
        Failure::new(exit_code(&e), e)
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;
