//! Experiment orchestration behind the `assortment` binary: config
//! parsing, the `run` / `reproduce-fig1` / `selftest` commands, and the
//! run manifest.
//!
//! Everything a run emits is a pure function of (config, seed); the worker
//! pool size only changes wall-clock time, never a byte of output.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod selftest;

use std::fmt;

/// Process exit codes: 0 success, 2 usage/config error, 3 selftest failure.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config file contents → exit 2.
    Usage(String),
    /// A selftest suite failed → exit 3.
    Selftest(String),
    /// I/O or internal failure → exit 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Selftest(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Selftest(msg) => write!(f, "selftest failed: {msg}"),
            CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

impl From<assortment_core::Error> for CliError {
    fn from(e: assortment_core::Error) -> Self {
        match e {
            assortment_core::Error::InvalidInput(_) | assortment_core::Error::InvalidItem { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
