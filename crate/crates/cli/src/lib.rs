//! File formats, configuration and the Monte Carlo harness around
//! `splitel-core`.

pub mod config;
pub mod error;
pub mod io;
pub mod simkit;

pub use error::{CliError, Result};
