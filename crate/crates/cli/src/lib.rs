//! Command-line front end for the oscillating-error classifier: run
//! configuration, the benchmark dataset registry and the subcommands.

pub mod bench;
pub mod commands;
pub mod config;
pub mod pipeline;
pub mod registry;
