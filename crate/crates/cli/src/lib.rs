//! Command-line experiments: synthesize sequences, augment them, train a
//! segmenter and evaluate it over a threshold sweep.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;

pub use app::run;
pub use commands::*;
pub use config::ExperimentConfig;
pub use error::{CmdResult, Failure};
