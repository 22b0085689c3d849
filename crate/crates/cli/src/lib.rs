//! Configuration, dispatch and report writing behind the `skewlab` binary.

pub mod config;
pub mod error;
pub mod observable;
pub mod run;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
