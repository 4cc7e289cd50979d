//! Documents, cleaning, and corpus filters.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::stopwords;
use crate::text::{self, is_emoji, is_word_char};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
    #[error("keyword set is empty")]
    EmptyKeywords,
    #[error("date range start {start} is after end {end}")]
    InvertedRange { start: DateTime<Utc>, end: DateTime<Utc> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub raw_text: String,
    #[serde(default)]
    pub clean_text: String,
    pub timestamp: DateTime<Utc>,
    pub likes: u64,
    pub retweets: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang_hint: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, raw_text: impl Into<String>, timestamp: DateTime<Utc>) -> Self {
        Document {
            id: id.into(),
            raw_text: raw_text.into(),
            clean_text: String::new(),
            timestamp,
            likes: 0,
            retweets: 0,
            lang_hint: None,
        }
    }
}

/// An ordered collection of documents with unique ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    documents: Vec<Document>,
    pub source: String,
}

impl Corpus {
    pub fn new(documents: Vec<Document>, source: impl Into<String>) -> Result<Self, CorpusError> {
        let mut seen = BTreeSet::new();
        for d in &documents {
            if !seen.insert(d.id.as_str()) {
                return Err(CorpusError::DuplicateId(d.id.clone()));
            }
        }
        Ok(Corpus { documents, source: source.into() })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }

    /// Keeps documents matching `keep`, preserving order. Ids stay unique.
    fn retain(&self, mut keep: impl FnMut(&Document) -> bool) -> Corpus {
        Corpus {
            documents: self.documents.iter().filter(|d| keep(d)).cloned().collect(),
            source: self.source.clone(),
        }
    }
}

/// Lowercase search phrases. Internal whitespace is collapsed to one space.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordSet(BTreeSet<String>);

impl KeywordSet {
    /// The two seed terms the discovery loop starts from.
    pub fn seeds() -> Self {
        Self::from_phrases(["asian games", "esports"])
    }

    pub fn from_phrases<I, S>(phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for p in phrases {
            let words: Vec<String> = p
                .as_ref()
                .split_whitespace()
                .map(|w| w.to_lowercase())
                .collect();
            if !words.is_empty() {
                set.insert(words.join(" "));
            }
        }
        KeywordSet(set)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn contains(&self, phrase: &str) -> bool {
        self.0.contains(phrase)
    }

    pub fn is_subset(&self, other: &KeywordSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

/// Cleaning switches. There is intentionally no stemming or lemmatization
/// switch: word forms are left as written.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct CleaningRules {
    pub remove_urls: bool,
    pub remove_mentions: bool,
    pub remove_emoji: bool,
    pub remove_punctuation: bool,
    pub remove_stopwords: bool,
    pub lowercase: bool,
    pub keep_hashtag_word: bool,
    /// Language code to stop-word set. Looked up by `lang_hint`; documents
    /// without a hint (or with an unknown one) use the union of all lists.
    pub stopword_lists: BTreeMap<String, BTreeSet<String>>,
}

impl Default for CleaningRules {
    fn default() -> Self {
        let mut stopword_lists = BTreeMap::new();
        stopword_lists.insert(String::from("en"), stopwords::english());
        CleaningRules {
            remove_urls: true,
            remove_mentions: true,
            remove_emoji: true,
            remove_punctuation: true,
            remove_stopwords: true,
            lowercase: true,
            keep_hashtag_word: true,
            stopword_lists,
        }
    }
}

impl CleaningRules {
    fn union_stopwords(&self) -> BTreeSet<&str> {
        self.stopword_lists
            .values()
            .flat_map(|s| s.iter().map(String::as_str))
            .collect()
    }

    /// Applies every enabled rule to one text.
    pub fn clean(&self, raw: &str, lang_hint: Option<&str>) -> String {
        let stop: Option<BTreeSet<&str>> = self.remove_stopwords.then(|| {
            match lang_hint.and_then(|l| self.stopword_lists.get(l)) {
                Some(list) => list.iter().map(String::as_str).collect(),
                None => self.union_stopwords(),
            }
        });
        self.clean_with(raw, stop.as_ref())
    }

    fn clean_with(&self, raw: &str, stop: Option<&BTreeSet<&str>>) -> String {
        let mut text = String::with_capacity(raw.len());
        for tok in raw.split_whitespace() {
            let mut tok = if self.remove_urls { strip_url(tok) } else { tok };
            if !self.keep_hashtag_word && tok.starts_with('#') {
                tok = "";
            }
            let tok = if self.remove_mentions { strip_mentions(tok) } else { String::from(tok) };
            if !tok.is_empty() {
                text.push_str(&tok);
                text.push(' ');
            }
        }

        let mut filtered = String::with_capacity(text.len());
        for c in text.chars() {
            if self.remove_emoji && is_emoji(c) {
                filtered.push(' ');
            } else if self.remove_punctuation && !c.is_whitespace() && !is_word_char(c) {
                filtered.push(' ');
            } else if self.lowercase {
                filtered.extend(c.to_lowercase());
            } else {
                filtered.push(c);
            }
        }

        let mut out = String::with_capacity(filtered.len());
        for tok in text::tokens(&filtered) {
            if let Some(stop) = stop {
                let lowered;
                let key = if self.lowercase {
                    tok
                } else {
                    lowered = tok.to_lowercase();
                    lowered.as_str()
                };
                if stop.contains(key) {
                    continue;
                }
            }
            if !out.is_empty() {
                out.push(' ');
            }
            out.push_str(tok);
        }
        out
    }
}

/// Drops a URL starting anywhere in the token, keeping any prefix before it.
fn strip_url(tok: &str) -> &str {
    let lower_starts = |s: &str, p: &str| s.len() >= p.len() && s.is_char_boundary(p.len()) && s[..p.len()].eq_ignore_ascii_case(p);
    for (i, _) in tok.char_indices() {
        let rest = &tok[i..];
        if lower_starts(rest, "http://") || lower_starts(rest, "https://") || lower_starts(rest, "www.") {
            // `www.` only counts at a word start
            if lower_starts(rest, "www.") && i > 0 && is_word_char(tok[..i].chars().next_back().unwrap()) {
                continue;
            }
            return &tok[..i];
        }
    }
    tok
}

/// Removes `@handle` runs. An `@` directly after a word character (an email
/// address) is left for the punctuation pass.
fn strip_mentions(tok: &str) -> String {
    let mut out = String::with_capacity(tok.len());
    let mut chars = tok.chars().peekable();
    let mut prev_word = false;
    while let Some(c) = chars.next() {
        if c == '@' && !prev_word {
            while let Some(&n) = chars.peek() {
                if is_word_char(n) || n == '_' {
                    chars.next();
                } else {
                    break;
                }
            }
            prev_word = false;
            continue;
        }
        prev_word = is_word_char(c);
        out.push(c);
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessStats {
    /// Ids of documents whose cleaned text was empty.
    pub dropped_empty: Vec<String>,
    /// Ids of documents collapsed into an earlier document with the same cleaned text.
    pub dropped_duplicate: Vec<String>,
}

/// Cleans every document, drops empties, and collapses exact duplicates to
/// their first occurrence.
pub fn preprocess(corpus: &Corpus, rules: &CleaningRules) -> (Corpus, PreprocessStats) {
    let union = rules.union_stopwords();
    let per_lang: BTreeMap<&str, BTreeSet<&str>> = rules
        .stopword_lists
        .iter()
        .map(|(k, v)| (k.as_str(), v.iter().map(String::as_str).collect()))
        .collect();

    let mut stats = PreprocessStats::default();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut kept = Vec::with_capacity(corpus.len());
    for doc in corpus.documents() {
        let stop = rules.remove_stopwords.then(|| {
            doc.lang_hint
                .as_deref()
                .and_then(|l| per_lang.get(l))
                .unwrap_or(&union)
        });
        let clean = rules.clean_with(&doc.raw_text, stop);
        if clean.is_empty() {
            stats.dropped_empty.push(doc.id.clone());
            continue;
        }
        if !seen.insert(clean.clone()) {
            stats.dropped_duplicate.push(doc.id.clone());
            continue;
        }
        let mut d = doc.clone();
        d.clean_text = clean;
        kept.push(d);
    }
    (Corpus { documents: kept, source: corpus.source.clone() }, stats)
}

/// Tokens used for keyword matching: the cleaned text when present,
/// otherwise a normalized form of the raw text.
fn match_tokens(doc: &Document) -> Vec<String> {
    if doc.clean_text.is_empty() {
        text::normalize_tokens(&doc.raw_text)
    } else {
        text::normalize_tokens(&doc.clean_text)
    }
}

/// Keeps documents containing at least one keyword as a whole-token phrase.
pub fn filter_by_keywords(corpus: &Corpus, keywords: &KeywordSet) -> Result<Corpus, CorpusError> {
    if keywords.is_empty() {
        return Err(CorpusError::EmptyKeywords);
    }
    let phrases: Vec<Vec<&str>> = keywords
        .iter()
        .map(|k| k.split(' ').collect())
        .collect();
    Ok(corpus.retain(|doc| {
        let toks = match_tokens(doc);
        phrases.iter().any(|p| {
            toks.windows(p.len())
                .any(|w| w.iter().zip(p.iter()).all(|(a, b)| a == b))
        })
    }))
}

/// One round of keyword discovery: merge proposals, and report saturation
/// when nothing new was proposed.
pub fn saturation_step(known: &KeywordSet, proposed: &KeywordSet) -> (KeywordSet, bool) {
    let saturated = proposed.is_subset(known);
    let mut updated = known.clone();
    updated.0.extend(proposed.0.iter().cloned());
    (updated, saturated)
}

/// Closed interval filter on timestamps.
pub fn filter_by_daterange(
    corpus: &Corpus,
    start: DateTime<Utc>,
    end: DateTime<Utc>,
) -> Result<Corpus, CorpusError> {
    if start > end {
        return Err(CorpusError::InvertedRange { start, end });
    }
    Ok(corpus.retain(|d| start <= d.timestamp && d.timestamp <= end))
}
