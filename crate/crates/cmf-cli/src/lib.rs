//! Benchmark harness and configuration for the `cmf` command-line tool.

pub mod bench;
pub mod config;
