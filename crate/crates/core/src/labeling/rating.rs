use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::LabelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

impl FromStr for Verdict {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "accept" | "agree" | "yes" | "1" => Ok(Verdict::Accept),
            "reject" | "disagree" | "no" | "0" => Ok(Verdict::Reject),
            other => Err(LabelError::BadVerdict(String::from(other))),
        }
    }
}

/// One rater's verdicts on the generated labels, keyed by topic id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingSheet {
    pub rater: String,
    pub verdicts: BTreeMap<usize, Verdict>,
}

impl RatingSheet {
    pub fn new(rater: impl Into<String>) -> Self {
        RatingSheet { rater: rater.into(), verdicts: BTreeMap::new() }
    }

    /// Records a verdict; a topic may be rated once.
    pub fn insert(&mut self, topic_id: usize, v: Verdict) -> Result<(), LabelError> {
        if self.verdicts.insert(topic_id, v).is_some() {
            return Err(LabelError::DuplicateRating(topic_id));
        }
        Ok(())
    }

    pub fn accepted_count(&self) -> usize {
        self.verdicts.values().filter(|v| **v == Verdict::Accept).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub n_topics: usize,
    /// Topics where both raters gave the same verdict.
    pub matching: usize,
    pub agreement: f64,
    /// Labels accepted by both raters.
    pub both_accept: usize,
}

/// Percent agreement between two sheets covering the same topic ids.
pub fn rate_agreement(a: &RatingSheet, b: &RatingSheet) -> Result<Agreement, LabelError> {
    let ka: BTreeSet<usize> = a.verdicts.keys().copied().collect();
    let kb: BTreeSet<usize> = b.verdicts.keys().copied().collect();
    if ka != kb {
        let diff: Vec<usize> = ka.symmetric_difference(&kb).copied().collect();
        return Err(LabelError::RatingMismatch(diff));
    }
    let n = ka.len();
    let matching = ka.iter().filter(|k| a.verdicts[k] == b.verdicts[k]).count();
    let both_accept = ka.iter().filter(|k| a.verdicts[k] == Verdict::Accept && b.verdicts[k] == Verdict::Accept).count();
    let agreement = if n == 0 { 1.0 } else { matching as f64 / n as f64 };
    Ok(Agreement { n_topics: n, matching, agreement, both_accept })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sheet(v: &[(usize, Verdict)]) -> RatingSheet {
        let mut s = RatingSheet::new("r");
        for &(k, x) in v {
            s.insert(k, x).unwrap();
        }
        s
    }

    #[test]
    fn agreement_counts() {
        use Verdict::*;
        let a = sheet(&[(0, Accept), (1, Accept), (2, Reject), (3, Accept)]);
        let b = sheet(&[(0, Accept), (1, Reject), (2, Reject), (3, Accept)]);
        let r = rate_agreement(&a, &b).unwrap();
        assert_eq!(r.matching, 3);
        assert_eq!(r.both_accept, 2);
        assert_eq!(r.agreement, 0.75);
        assert_eq!(rate_agreement(&b, &a).unwrap(), r);
    }

    #[test]
    fn mismatched_ids() {
        let a = sheet(&[(0, Verdict::Accept), (1, Verdict::Accept)]);
        let b = sheet(&[(0, Verdict::Accept), (2, Verdict::Accept)]);
        assert_eq!(rate_agreement(&a, &b).unwrap_err(), LabelError::RatingMismatch(alloc::vec![1, 2]));
        let mut s = a.clone();
        assert_eq!(s.insert(0, Verdict::Reject).unwrap_err(), LabelError::DuplicateRating(0));
    }

    #[test]
    fn verdict_parsing() {
        assert_eq!(" Accept ".parse::<Verdict>().unwrap(), Verdict::Accept);
        assert_eq!("no".parse::<Verdict>().unwrap(), Verdict::Reject);
        assert!("maybe".parse::<Verdict>().is_err());
    }
}
