//! Command-line front end: equation files in, JSON reports out.

pub mod args;
pub mod commands;
pub mod equation;
pub mod plot;

pub use args::{Cli, Command, RunArgs};
pub use commands::{run, CliError, Output, RunConfig};
pub use equation::{EquationFile, InputError};
