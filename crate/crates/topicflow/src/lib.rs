//! Command-line pipeline around `topicflow-core`: file formats, embedding
//! and labeling services, parallel execution, caching, and reports.

pub mod cli;
pub mod config;
pub mod embedfile;
pub mod error;
pub mod ingest;
pub mod labeler;
pub mod logging;
pub mod parallel;
pub mod pipeline;
pub mod providers;
pub mod report;
pub mod saturate;

pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use pipeline::{Pipeline, Stage};
