//! Configuration, artifact writers and subcommands behind the `relapse`
//! binary.

pub mod commands;
pub mod config;
pub mod output;
