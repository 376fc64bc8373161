//! Parallel driver, disk caches, file formats and command-line surface for
//! the process-chain kernel in `procchain-core`.

pub mod cache;
pub mod commands;
pub mod config;
pub mod driver;
pub mod error;
pub mod output;
pub mod pipeline;

pub use procchain_core as core;
