//! Topic representations: class-based TF-IDF, top terms, representative
//! documents, outlier reassignment, and 2-D map coordinates.

pub mod counts;
pub mod map;
pub mod outliers;

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use counts::{build_class_counts, ClassTermCounts, SparseVec, StopPolicy, Vocabulary};
pub use map::{topic_map_coordinates, MapPoint, TopicMap};
pub use outliers::{reassign_outliers, OutlierStrategy, Reassignment};

use crate::cluster::ClusterAssignment;
use crate::text;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopicError {
    #[error("no documents assigned to any topic")]
    NoTopics,
    #[error("{docs} documents but {labels} labels")]
    Misaligned { docs: usize, labels: usize },
    #[error("label {label} out of range for {n_classes} classes")]
    LabelOutOfRange { label: i64, n_classes: usize },
    #[error("unknown reassignment strategy `{0}`")]
    UnknownStrategy(String),
    #[error("window and stride must be positive")]
    BadWindow,
    #[error(transparent)]
    Reduce(#[from] crate::reduce::ReduceError),
}

impl ClassTermCounts {
    /// Builds counts straight from a `c x t` frequency table.
    pub fn from_tf(tf: Vec<Vec<u64>>) -> Self {
        let c = tf.len();
        let t = tf.first().map_or(0, Vec::len);
        let class_total_words: Vec<u64> = tf.iter().map(|r| r.iter().sum()).collect();
        let avg_words = if c == 0 { 0.0 } else { class_total_words.iter().sum::<u64>() as f64 / c as f64 };
        let term_freq = (0..t).map(|j| tf.iter().map(|r| r[j]).sum()).collect();
        ClassTermCounts { tf, class_total_words, avg_words, term_freq }
    }
}

/// `c x t` class-based TF-IDF weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtfIdf {
    pub weights: Vec<Vec<f64>>,
}

impl CtfIdf {
    pub fn n_topics(&self) -> usize {
        self.weights.len()
    }

    pub fn row(&self, c: usize) -> &[f64] {
        &self.weights[c]
    }

    /// Copy with each row scaled to unit L2 norm (zero rows stay zero).
    pub fn l2_normalized(&self) -> CtfIdf {
        let weights = self
            .weights
            .iter()
            .map(|r| {
                let n = libm::sqrt(r.iter().map(|v| v * v).sum::<f64>());
                if n > 0.0 {
                    r.iter().map(|v| v / n).collect()
                } else {
                    r.clone()
                }
            })
            .collect();
        CtfIdf { weights }
    }
}

/// `W[c][t] = tf[c][t] * ln(1 + A / f[t])`.
pub fn compute_ctfidf(counts: &ClassTermCounts) -> CtfIdf {
    let idf: Vec<f64> = counts
        .term_freq
        .iter()
        .map(|&f| if f == 0 { 0.0 } else { libm::log(1.0 + counts.avg_words / f as f64) })
        .collect();
    let weights = counts
        .tf
        .iter()
        .map(|row| row.iter().zip(&idf).map(|(&tf, &w)| if tf == 0 { 0.0 } else { tf as f64 * w }).collect())
        .collect();
    CtfIdf { weights }
}

/// Sorts by descending weight, then term ascending.
fn by_weight_then_term(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

/// Up to `n` positive-weight terms per topic, highest first, ties
/// alphabetical.
pub fn top_terms(w: &CtfIdf, vocab: &Vocabulary, n: usize) -> Vec<Vec<(String, f64)>> {
    w.weights
        .iter()
        .map(|row| {
            let mut terms: Vec<(String, f64)> = row
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > 0.0)
                .map(|(i, &v)| (String::from(vocab.term(i)), v))
                .collect();
            terms.sort_by(by_weight_then_term);
            terms.truncate(n);
            terms
        })
        .collect()
}

/// Cosine between a sparse vector and a dense row.
pub fn sparse_cosine(v: &SparseVec, row: &[f64]) -> f64 {
    let (mut dot, mut nv) = (0.0, 0.0);
    for &(i, x) in v {
        dot += x * row[i];
        nv += x * x;
    }
    let nr: f64 = row.iter().map(|x| x * x).sum();
    if nv == 0.0 || nr == 0.0 {
        0.0
    } else {
        dot / libm::sqrt(nv * nr)
    }
}

/// Members ranked by cosine between their term counts and the topic row;
/// ties keep corpus order. At most `nr_docs` indices.
pub fn representative_documents(members: &[usize], doc_vectors: &[SparseVec], row: &[f64], nr_docs: usize) -> Vec<usize> {
    let mut scored: Vec<(usize, f64)> = members
        .iter()
        .map(|&m| (m, sparse_cosine(&doc_vectors[m], row)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.into_iter().take(nr_docs).map(|(m, _)| m).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub id: usize,
    pub count: usize,
    /// Positive weights only, highest first.
    pub ctfidf_weights: Vec<(String, f64)>,
    pub top_terms: Vec<String>,
    pub representative_doc_ids: Vec<String>,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub topics: Vec<Topic>,
}

impl TopicModel {
    pub fn total_count(&self) -> usize {
        self.topics.iter().map(|t| t.count).sum()
    }

    pub fn get(&self, id: usize) -> Option<&Topic> {
        self.topics.iter().find(|t| t.id == id)
    }

    /// Topic label, falling back to the first four top terms.
    pub fn label_or_terms(&self, id: usize) -> String {
        match self.get(id) {
            Some(Topic { label: Some(l), .. }) => l.clone(),
            Some(t) => t.top_terms.iter().take(4).cloned().collect::<Vec<_>>().join(" "),
            None => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RepresentationParams {
    pub n_terms: usize,
    pub nr_docs: usize,
    pub stop: StopPolicy,
    pub strategy: OutlierStrategy,
    pub threshold: f64,
}

impl Default for RepresentationParams {
    fn default() -> Self {
        RepresentationParams {
            n_terms: 10,
            nr_docs: 10,
            stop: StopPolicy::default(),
            strategy: OutlierStrategy::default(),
            threshold: 0.0,
        }
    }
}

/// Everything computed for one assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    pub model: TopicModel,
    pub vocab: Vocabulary,
    pub counts: ClassTermCounts,
    pub weights: CtfIdf,
    /// Term-count vector of every document over `vocab`.
    pub doc_vectors: Vec<SparseVec>,
}

/// Builds the topic model for a fixed assignment.
pub fn represent(
    doc_ids: &[String],
    texts: &[&str],
    assignment: &ClusterAssignment,
    params: &RepresentationParams,
) -> Result<Representation, TopicError> {
    if doc_ids.len() != texts.len() || texts.len() != assignment.len() {
        return Err(TopicError::Misaligned { docs: texts.len(), labels: assignment.len() });
    }
    let (vocab, counts) = build_class_counts(texts, &assignment.labels, assignment.n_clusters, &params.stop)?;
    let weights = compute_ctfidf(&counts);
    let doc_vectors: Vec<SparseVec> = texts.iter().map(|t| vocab.count_vector(text::tokens(t))).collect();
    let all_terms = top_terms(&weights, &vocab, usize::MAX);
    let sizes = assignment.counts();
    let mut topics = Vec::with_capacity(assignment.n_clusters);
    for (c, terms) in all_terms.into_iter().enumerate() {
        let members = assignment.members(c);
        let reps = representative_documents(&members, &doc_vectors, weights.row(c), params.nr_docs);
        topics.push(Topic {
            id: c,
            count: sizes[c],
            top_terms: terms.iter().take(params.n_terms).map(|t| t.0.clone()).collect(),
            ctfidf_weights: terms,
            representative_doc_ids: reps.into_iter().map(|i| doc_ids[i].clone()).collect(),
            label: None,
        });
    }
    Ok(Representation { model: TopicModel { topics }, vocab, counts, weights, doc_vectors })
}

/// Represent, reassign outliers against the initial weights, then represent
/// again so counts and terms reflect the final assignment.
pub fn fit_topics(
    doc_ids: &[String],
    texts: &[&str],
    assignment: &ClusterAssignment,
    params: &RepresentationParams,
) -> Result<(Representation, Reassignment), TopicError> {
    let initial = represent(doc_ids, texts, assignment, params)?;
    let re = reassign_outliers(
        assignment,
        texts,
        &initial.vocab,
        &initial.weights,
        params.strategy,
        params.threshold,
    )?;
    let fin = if re.reassigned > 0 { represent(doc_ids, texts, &re.assignment, params)? } else { initial };
    Ok((fin, re))
}

/// Dense unit-norm c-TF-IDF rows as a matrix, for the topic map.
pub fn topic_vectors(w: &CtfIdf) -> crate::matrix::Matrix {
    let n = w.l2_normalized();
    let t = n.weights.first().map_or(0, Vec::len);
    let mut data = Vec::with_capacity(n.weights.len() * t);
    for r in &n.weights {
        data.extend_from_slice(r);
    }
    crate::matrix::Matrix::from_vec(n.weights.len(), t, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn toy() -> (Vocabulary, ClassTermCounts) {
        build_class_counts(&["a a b", "b c"], &[0, 1], 2, &StopPolicy::none()).unwrap()
    }

    #[test]
    fn counting_example() {
        let (v, c) = toy();
        assert_eq!(v.terms(), ["a", "b", "c"]);
        assert_eq!(c.tf, [[2, 1, 0], [0, 1, 1]]);
        assert_eq!(c.term_freq, [2, 2, 1]);
        assert_eq!(c.avg_words, 2.5);
    }

    #[test]
    fn worked_weights() {
        let (_, c) = toy();
        let w = compute_ctfidf(&c);
        // 2 ln 2.25 and ln 3.5
        assert!((w.row(0)[0] - 1.6218604324326575).abs() < 1e-12);
        assert!((w.row(1)[2] - 1.252762968495368).abs() < 1e-12);
        assert_eq!(w.row(0)[2], 0.0);
    }

    #[test]
    fn stop_words_recorded() {
        let policy = StopPolicy { stopwords: ["the".to_string()].into_iter().collect(), max_doc_freq: 1.0 };
        let (v, _) = build_class_counts(&["the cat", "the dog"], &[0, 1], 2, &policy).unwrap();
        assert!(v.index_of("the").is_none());
        assert!(v.stop_filtered().contains("the"));
    }

    #[test]
    fn doc_frequency_cutoff() {
        let policy = StopPolicy { stopwords: Default::default(), max_doc_freq: 0.5 };
        let docs = ["x a", "x b", "x c", "d"];
        let (v, _) = build_class_counts(&docs, &[0, 0, 1, 1], 2, &policy).unwrap();
        // x is in 3 of 4 documents
        assert!(v.index_of("x").is_none());
        assert!(v.stop_filtered().contains("x"));
        assert!(v.index_of("a").is_some());
    }

    #[test]
    fn no_topics_is_an_error() {
        assert_eq!(
            build_class_counts(&["a"], &[-1], 1, &StopPolicy::none()).unwrap_err(),
            TopicError::NoTopics
        );
    }

    #[test]
    fn top_terms_sort_and_ties() {
        let mut v = build_class_counts(&["x y z"], &[0], 1, &StopPolicy::none()).unwrap().0;
        v.reindex();
        let w = CtfIdf { weights: vec![vec![3.0, 1.0, 2.0]] };
        let t = top_terms(&w, &v, 2);
        assert_eq!(t[0].iter().map(|x| x.0.as_str()).collect::<Vec<_>>(), ["x", "z"]);
        let w = CtfIdf { weights: vec![vec![1.0, 0.0, 1.0]] };
        let t = top_terms(&w, &v, 10);
        assert_eq!(t[0].iter().map(|x| x.0.as_str()).collect::<Vec<_>>(), ["x", "z"]);
    }

    #[test]
    fn representatives() {
        let row = [1.0, 1.0, 0.0, 0.0];
        let vecs: Vec<SparseVec> = vec![
            vec![(2, 1.0), (3, 1.0)],
            vec![(0, 1.0), (1, 1.0)],
            vec![(0, 1.0), (3, 1.0)],
        ];
        assert_eq!(representative_documents(&[0, 1, 2], &vecs, &row, 10), [1, 2, 0]);
        assert_eq!(representative_documents(&[0], &vecs, &row, 10), [0]);
        assert_eq!(representative_documents(&[0, 1, 2], &vecs, &row, 2), [1, 2]);
    }
}
