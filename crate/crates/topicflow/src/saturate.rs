//! Keyword discovery: grow a keyword set from the documents it matches
//! until a round proposes nothing new.

use std::collections::{BTreeMap, BTreeSet};

use topicflow_core::corpus::{filter_by_keywords, saturation_step};
use topicflow_core::text::normalize_tokens;
use topicflow_core::{Corpus, KeywordSet};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProposalParams {
    /// Minimum share of matched documents a candidate must appear in.
    pub min_share: f64,
    pub max_candidates: usize,
}

impl Default for ProposalParams {
    fn default() -> Self {
        ProposalParams { min_share: 0.2, max_candidates: 10 }
    }
}

/// Single-word candidates ranked by how many matched documents contain
/// them, ties broken alphabetically.
pub fn propose(matched: &Corpus, known: &KeywordSet, stop: &BTreeSet<String>, p: &ProposalParams) -> Vec<(String, usize)> {
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for d in matched.documents() {
        let toks: BTreeSet<String> = normalize_tokens(&d.raw_text).into_iter().collect();
        for t in toks {
            if t.chars().count() > 1 && !stop.contains(&t) && !known.contains(&t) && !t.chars().all(|c| c.is_ascii_digit()) {
                *df.entry(t).or_default() += 1;
            }
        }
    }
    let floor = (p.min_share * matched.len() as f64).ceil().max(1.0) as usize;
    let mut out: Vec<(String, usize)> = df.into_iter().filter(|(_, n)| *n >= floor).collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out.truncate(p.max_candidates);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationOutcome {
    pub keywords: KeywordSet,
    pub rounds: usize,
    pub saturated: bool,
    pub matched: usize,
}

/// Runs rounds until `choose` accepts nothing new or `max_rounds` is hit.
/// `choose` sees the round number and the ranked candidates and returns the
/// phrases to add.
pub fn saturate(
    corpus: &Corpus,
    seeds: KeywordSet,
    stop: &BTreeSet<String>,
    params: &ProposalParams,
    max_rounds: usize,
    mut choose: impl FnMut(usize, &[(String, usize)]) -> Vec<String>,
) -> Result<SaturationOutcome> {
    let mut known = seeds;
    for round in 1..=max_rounds {
        let matched = filter_by_keywords(corpus, &known)?;
        let cands = propose(&matched, &known, stop, params);
        let accepted = KeywordSet::from_phrases(choose(round, &cands));
        let (next, saturated) = saturation_step(&known, &accepted);
        known = next;
        log::info!("round {round}: {} documents matched, {} keywords", matched.len(), known.len());
        if saturated {
            return Ok(SaturationOutcome { matched: matched.len(), keywords: known, rounds: round, saturated: true });
        }
    }
    let matched = filter_by_keywords(corpus, &known)?.len();
    Ok(SaturationOutcome { keywords: known, rounds: max_rounds, saturated: false, matched })
}
