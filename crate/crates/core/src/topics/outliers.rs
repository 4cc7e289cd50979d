use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{sparse_cosine, CtfIdf, TopicError, Vocabulary};
use crate::cluster::ClusterAssignment;
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum OutlierStrategy {
    /// Whole-document term vector against each topic row.
    Ctfidf,
    /// Sliding token windows scored against each topic and summed into a
    /// per-topic distribution.
    Distributions { window: usize, stride: usize },
}

impl Default for OutlierStrategy {
    fn default() -> Self {
        OutlierStrategy::Ctfidf
    }
}

impl FromStr for OutlierStrategy {
    type Err = TopicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ctfidf" | "c-tf-idf" => Ok(OutlierStrategy::Ctfidf),
            "distributions" => Ok(OutlierStrategy::Distributions { window: 4, stride: 1 }),
            other => Err(TopicError::UnknownStrategy(String::from(other))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reassignment {
    pub assignment: ClusterAssignment,
    pub reassigned: usize,
    /// Noise documents with no scorable terms or below the threshold.
    pub still_noise: Vec<usize>,
}

fn argmax(scores: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best
}

/// Scores one document; `None` when it has no in-vocabulary terms.
fn score(
    tokens: &[&str],
    vocab: &Vocabulary,
    rows: &CtfIdf,
    strategy: OutlierStrategy,
) -> Option<Vec<f64>> {
    match strategy {
        OutlierStrategy::Ctfidf => {
            let v = vocab.count_vector(tokens.iter().copied());
            if v.is_empty() {
                return None;
            }
            Some(rows.weights.iter().map(|r| sparse_cosine(&v, r)).collect())
        }
        OutlierStrategy::Distributions { window, stride } => {
            let mut totals = vec![0.0; rows.n_topics()];
            let mut start = 0;
            loop {
                let end = (start + window).min(tokens.len());
                let v = vocab.count_vector(tokens[start..end].iter().copied());
                if !v.is_empty() {
                    for (t, r) in totals.iter_mut().zip(&rows.weights) {
                        *t += sparse_cosine(&v, r);
                    }
                }
                if end >= tokens.len() {
                    break;
                }
                start += stride;
            }
            let mass: f64 = totals.iter().sum();
            if mass <= 0.0 {
                return None;
            }
            Some(totals.into_iter().map(|t| t / mass).collect())
        }
    }
}

/// Assigns noise documents to their best-scoring topic when the score
/// reaches `threshold`. Labels of clustered documents never change.
pub fn reassign_outliers(
    assignment: &ClusterAssignment,
    texts: &[&str],
    vocab: &Vocabulary,
    weights: &CtfIdf,
    strategy: OutlierStrategy,
    threshold: f64,
) -> Result<Reassignment, TopicError> {
    if let OutlierStrategy::Distributions { window, stride } = strategy {
        if window == 0 || stride == 0 {
            return Err(TopicError::BadWindow);
        }
    }
    if texts.len() != assignment.len() {
        return Err(TopicError::Misaligned { docs: texts.len(), labels: assignment.len() });
    }
    if assignment.n_clusters == 0 {
        return Err(TopicError::NoTopics);
    }
    let mut out = assignment.clone();
    let mut reassigned = 0;
    let mut still_noise = Vec::new();
    for (i, t) in texts.iter().enumerate() {
        if assignment.labels[i] >= 0 {
            continue;
        }
        let tokens: Vec<&str> = text::tokens(t).collect();
        match score(&tokens, vocab, weights, strategy).as_deref().and_then(argmax) {
            Some((topic, s)) if s >= threshold => {
                out.labels[i] = topic as i64;
                // strength must stay positive for a labeled document
                out.strengths[i] = s.clamp(f64::MIN_POSITIVE, 1.0);
                reassigned += 1;
            }
            _ => still_noise.push(i),
        }
    }
    Ok(Reassignment { assignment: out, reassigned, still_noise })
}
