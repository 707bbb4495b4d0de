//! Command-line pipeline around `repoecg-core`: API and git mining, dump
//! files, monthly CSVs, and the commands that tie the stages together.

pub mod config;
pub mod csvio;
pub mod error;
pub mod gitlog;
pub mod ingest;
pub mod pipeline;
pub mod scorer;

pub use config::Config;
pub use error::{exit, Error, Result};
pub use pipeline::{Pipeline, Target};
