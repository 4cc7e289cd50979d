//! Prompt rendering, completion providers with retry, label cleanup, and
//! human rating sheets.

pub mod prompt;
pub mod provider;
pub mod rating;

use alloc::string::String;
use alloc::vec::Vec;

pub use prompt::{build_prompt, render_documents, LabelRequest, PromptTemplate, DEFAULT_TEMPLATE, DOCUMENTS, KEYWORDS};
pub use provider::{
    fallback_label, label_topic, parse_label, request_completion, truncate_label, Completion, LabelProvider,
    LabelSource, ProviderError, RetryPolicy, StubProvider, TopicLabel, MAX_LABEL_CHARS,
};
pub use rating::{rate_agreement, Agreement, RatingSheet, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("invalid prompt template: {0}")]
    Template(String),
    #[error("topic {0} has no keywords or no documents")]
    EmptyRequest(usize),
    #[error("completion was empty after cleanup")]
    EmptyLabel,
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("unknown verdict `{0}`")]
    BadVerdict(String),
    #[error("topic {0} rated twice")]
    DuplicateRating(usize),
    #[error("rating sheets cover different topics: {0:?}")]
    RatingMismatch(Vec<usize>),
}
