//! Command-line front end for `entbound`: single-state bounds, noise sweeps,
//! the Horodecki grid and chessboard histograms, with CSV and JSON output.

pub mod app;
pub mod commands;
pub mod error;
pub mod record;
pub mod spec;
pub mod statefile;

pub use error::CliError;
