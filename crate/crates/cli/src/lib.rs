//! Benchmark harness over the echelon planning library: a TOML-configured
//! pipeline that generates synthetic order and demand data, builds and
//! scores warehouse assortments, tunes transfer policies, simulates them,
//! and writes every table and artifact as reproducible plain-text files.

pub mod artifacts;
pub mod config;
pub mod pipeline;

pub use config::{Method, PolicyKind, RunConfig};
pub use pipeline::{run_benchmark, BenchSummary};
