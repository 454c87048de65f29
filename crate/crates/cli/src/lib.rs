//! Library backing the `gfcn` command line tool. The binary is a thin
//! argument-parsing shell; everything it does is callable from here.

pub mod commands;
pub mod error;
pub mod idx;
pub mod tasks;
pub mod training;

pub use error::{CliError, EXIT_INPUT, EXIT_MODEL, EXIT_PRECONDITION, EXIT_TARGET};
