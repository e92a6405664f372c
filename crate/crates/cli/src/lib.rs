//! Configuration parsing and end-to-end pipelines for the `confam` binary.

pub mod config;
pub mod error;
pub mod pipeline;

pub use config::{parse_config, RawConfig, RunConfig};
pub use error::CliError;
pub use pipeline::{run_pipeline, RunSummary};
