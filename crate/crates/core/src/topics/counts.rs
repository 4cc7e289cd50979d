use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::TopicError;
use crate::stopwords;
use crate::text;

/// Which terms are dropped from the class documents before weighting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StopPolicy {
    pub stopwords: BTreeSet<String>,
    /// Terms found in more than this fraction of all documents are removed.
    /// `1.0` disables the cutoff.
    pub max_doc_freq: f64,
}

impl Default for StopPolicy {
    fn default() -> Self {
        StopPolicy { stopwords: stopwords::english(), max_doc_freq: 0.5 }
    }
}

impl StopPolicy {
    pub fn none() -> Self {
        StopPolicy { stopwords: BTreeSet::new(), max_doc_freq: 1.0 }
    }
}

/// Sparse term-count vector: `(term index, count)` sorted by index.
pub type SparseVec = Vec<(usize, f64)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    stop_filtered: BTreeSet<String>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, i: usize) -> &str {
        &self.terms[i]
    }

    pub fn doc_freq(&self, i: usize) -> usize {
        self.doc_freq[i]
    }

    pub fn stop_filtered(&self) -> &BTreeSet<String> {
        &self.stop_filtered
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Counts of in-vocabulary tokens.
    pub fn count_vector<'a>(&self, tokens: impl IntoIterator<Item = &'a str>) -> SparseVec {
        let mut m: BTreeMap<usize, f64> = BTreeMap::new();
        for t in tokens {
            if let Some(i) = self.index_of(t) {
                *m.entry(i).or_insert(0.0) += 1.0;
            }
        }
        m.into_iter().collect()
    }

    pub fn vectorize(&self, text: &str) -> SparseVec {
        self.count_vector(text::tokens(text))
    }
}

/// Per-class term frequencies over the vocabulary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassTermCounts {
    /// `c x t` counts.
    pub tf: Vec<Vec<u64>>,
    pub class_total_words: Vec<u64>,
    /// Mean of `class_total_words`.
    pub avg_words: f64,
    /// Total frequency of each term across classes.
    pub term_freq: Vec<u64>,
}

/// Concatenates each class's documents and counts terms, after removing stop
/// words and terms above the document-frequency cutoff. Documents labeled
/// `-1` count toward document frequency but not toward any class.
pub fn build_class_counts(
    docs: &[&str],
    labels: &[i64],
    n_classes: usize,
    policy: &StopPolicy,
) -> Result<(Vocabulary, ClassTermCounts), TopicError> {
    if docs.len() != labels.len() {
        return Err(TopicError::Misaligned { docs: docs.len(), labels: labels.len() });
    }
    if n_classes == 0 || labels.iter().all(|&l| l < 0) {
        return Err(TopicError::NoTopics);
    }

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for d in docs {
        let uniq: BTreeSet<&str> = text::tokens(d).collect();
        for t in uniq {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    let n_docs = docs.len() as f64;
    let filtered = |t: &str| {
        policy.stopwords.contains(t)
            || df.get(t).is_some_and(|&c| c as f64 / n_docs > policy.max_doc_freq)
    };
    let stop_filtered: BTreeSet<String> =
        df.keys().filter(|t| filtered(t)).map(|t| t.to_string()).collect();

    let mut class_terms: BTreeSet<&str> = BTreeSet::new();
    for (d, &l) in docs.iter().zip(labels) {
        if l < 0 {
            continue;
        }
        if l as usize >= n_classes {
            return Err(TopicError::LabelOutOfRange { label: l, n_classes });
        }
        class_terms.extend(text::tokens(d).filter(|t| !filtered(t)));
    }

    let terms: Vec<String> = class_terms.iter().map(|t| t.to_string()).collect();
    let index: BTreeMap<String, usize> = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let doc_freq = terms.iter().map(|t| df[t.as_str()]).collect();

    let mut tf = vec![vec![0u64; terms.len()]; n_classes];
    for (d, &l) in docs.iter().zip(labels) {
        if l < 0 {
            continue;
        }
        for t in text::tokens(d) {
            if let Some(&i) = index.get(t) {
                tf[l as usize][i] += 1;
            }
        }
    }
    let class_total_words: Vec<u64> = tf.iter().map(|r| r.iter().sum()).collect();
    let avg_words = class_total_words.iter().sum::<u64>() as f64 / n_classes as f64;
    let term_freq = (0..terms.len()).map(|t| tf.iter().map(|r| r[t]).sum()).collect();

    Ok((
        Vocabulary { terms, doc_freq, stop_filtered, index },
        ClassTermCounts { tf, class_total_words, avg_words, term_freq },
    ))
}

impl Vocabulary {
    /// Rebuilds the lookup index after deserialization.
    pub fn reindex(&mut self) {
        self.index = self.terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    }
}
