//! File formats, the cached artifact pipeline and the command line for the
//! sleep-staging feature framework.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifact;
pub mod cli;
pub mod config;
pub mod csvio;
pub mod edf;
pub mod error;
pub mod parallel;
pub mod pipeline;
pub mod synthetic;

pub use config::PipelineConfig;
pub use error::{CliError, Result};
pub use pipeline::{Pipeline, Stage};
