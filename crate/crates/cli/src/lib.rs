//! Command-line pipeline around `scdd-core`: configuration, staged outputs
//! with manifests, and the subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod pipeline;
