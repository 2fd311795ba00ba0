//! Files and command line for `impulsive-core`.
//!
//! [`run`] takes an argument vector and returns a [`CommandResult`] holding
//! the exit code, the artifacts written and a summary JSON document. CSV
//! output uses `%.12e` floats in a fixed row order, so repeated runs are
//! byte-identical.

pub mod cli;
pub mod config;
pub mod error;
pub mod format;

pub use cli::{run, CommandResult};
pub use error::{CliError, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION_FAILED};
