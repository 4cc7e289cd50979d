use std::io;
use std::path::{Path, PathBuf};

use topicflow_core::cluster::ClusterError;
use topicflow_core::corpus::CorpusError;
use topicflow_core::embedding::EmbeddingError;
use topicflow_core::labeling::LabelError;
use topicflow_core::reduce::ReduceError;
use topicflow_core::themes::ThemeError;
use topicflow_core::topics::TopicError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{}: {bad} of {total} lines malformed (lines {})", path.display(), fmt_lines(lines))]
    Malformed { path: PathBuf, bad: usize, total: usize, lines: Vec<usize> },
    #[error("{}: line {line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{}: corrupt embedding file: {reason}", path.display())]
    CorruptEmbeddings { path: PathBuf, reason: String },
    #[error("embedding provider: {0}")]
    Provider(String),
    #[error("{0}")]
    Pipeline(String),
    #[error("missing {}; run `topicflow {stage}` first", path.display())]
    MissingArtifact { path: PathBuf, stage: &'static str },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Topic(#[from] TopicError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Theme(#[from] ThemeError),
    #[error("stage `{stage}` failed: {source}")]
    Stage { stage: &'static str, source: Box<Error> },
}

fn fmt_lines(lines: &[usize]) -> String {
    const SHOWN: usize = 20;
    let mut s: Vec<String> = lines.iter().take(SHOWN).map(usize::to_string).collect();
    if lines.len() > SHOWN {
        s.push(format!("... {} more", lines.len() - SHOWN));
    }
    s.join(", ")
}

impl Error {
    pub fn io(path: impl AsRef<Path>, source: io::Error) -> Self {
        Error::Io { path: path.as_ref().to_path_buf(), source }
    }

    /// Process exit code: 1 for usage and configuration problems, 2 for
    /// failures while running a stage.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) => 1,
            _ => 2,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ (Error::Stage { .. } | Error::Usage(_) | Error::Config(_)) => e,
            e => Error::Stage { stage, source: Box::new(e) },
        }
    }
}

/// Reads a whole file, attaching the path to errors.
pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
