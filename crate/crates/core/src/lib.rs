//! Core algorithms for clustering short social-media posts into topics and
//! themes: text cleaning, neighbor-graph dimensionality reduction,
//! density-based clustering, class-based TF-IDF, outlier reassignment,
//! prompt rendering for topic labels, and theme aggregation.
//!
//! The crate is `no_std` and only needs an allocator. File formats, HTTP
//! providers, and the command line live in the `topicflow` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cluster;
pub mod corpus;
pub mod embedding;
pub mod labeling;
pub mod matrix;
pub mod metrics;
pub mod reduce;
pub mod stopwords;
pub mod text;
pub mod themes;
pub mod topics;

pub use cluster::{cluster, ClusterAssignment, Clustering, DensityParams};
pub use corpus::{CleaningRules, Corpus, Document, KeywordSet};
pub use embedding::{EmbeddingMatrix, ProviderKind};
pub use matrix::{Matrix, Metric};
pub use reduce::{reduce, ReduceConfig, Reduction};
pub use themes::{aggregate_themes, ThemeMapping, ThemeSummary};
pub use topics::{fit_topics, represent, RepresentationParams, Topic, TopicModel};
