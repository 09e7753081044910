//! Command-line front end for the qutrit random number generator simulator.

mod app;
pub mod config;
pub mod format;
pub mod parse;

pub use app::{chsh_values, exit, fmt12, run, CliError, MIN_RESOLUTION};
