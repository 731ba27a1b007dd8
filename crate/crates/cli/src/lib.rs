//! Scenario driver for the double-well library: configuration, command
//! implementations, CSV/JSON output and SVG plots.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;
