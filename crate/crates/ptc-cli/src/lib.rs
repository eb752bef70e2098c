//! Library backing the `ptc` binary: experiment configuration, report
//! shaping, artifact persistence, and the end-to-end pipelines.
//!
//! Everything here is deterministic given (config, seed): reports carry
//! no timestamps or machine state, so re-running a command reproduces
//! its output byte for byte. Wall-clock timing goes to stderr only.

pub mod config;
pub mod csvfmt;
pub mod persist;
pub mod pipeline;
pub mod report;

use std::fmt;

/// Process exit codes: the outcome classes scripts branch on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitClass {
    /// Bad configuration, arguments, or input files.
    Config,
    /// The request exceeds the configured enumeration or compute budget.
    Budget,
    /// `--assert-bounds` was set and a measured quantity broke its bound.
    BoundsFailed,
}

impl ExitClass {
    /// The process exit code for this class.
    pub fn code(self) -> i32 {
        match self {
            ExitClass::Config => 2,
            ExitClass::Budget => 3,
            ExitClass::BoundsFailed => 4,
        }
    }
}

/// A command failure: what went wrong plus how the process should exit.
#[derive(Debug)]
pub struct CliError {
    /// Outcome class (determines the exit code).
    pub class: ExitClass,
    /// Human-readable description.
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    /// A configuration/usage failure (exit code 2).
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            class: ExitClass::Config,
            message: message.into(),
        }
    }

    /// A budget refusal (exit code 3).
    pub fn budget(message: impl Into<String>) -> Self {
        CliError {
            class: ExitClass::Budget,
            message: message.into(),
        }
    }

    /// A bound assertion failure (exit code 4).
    pub fn bounds(message: impl Into<String>) -> Self {
        CliError {
            class: ExitClass::BoundsFailed,
            message: message.into(),
        }
    }
}

impl From<ptc_core::Error> for CliError {
    fn from(e: ptc_core::Error) -> Self {
        let class = match e {
            ptc_core::Error::EnumerationBudget { .. } | ptc_core::Error::ComputeBudget { .. } => {
                ExitClass::Budget
            }
            _ => ExitClass::Config,
        };
        CliError {
            class,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::config(format!("io error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::config(format!("json error: {e}"))
    }
}

/// Result alias for CLI operations.
pub type CliResult<T> = Result<T, CliError>;
