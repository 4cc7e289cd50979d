//! Grouping topics into named themes and summarizing their share of the
//! corpus.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Theme name used for topics no theme claims.
pub const UNMAPPED: &str = "(unmapped)";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ThemeError {
    #[error("topic {topic} is mapped to both `{first}` and `{second}`")]
    DuplicateTopic { topic: usize, first: String, second: String },
    #[error("theme `{0}` listed twice")]
    DuplicateTheme(String),
    #[error("theme `{theme}` refers to unknown topic {topic}")]
    UnknownTopic { theme: String, topic: usize },
    #[error("theme name `{0}` is reserved")]
    ReservedName(String),
    #[error("theme `{0}` has no topics")]
    EmptyTheme(String),
    #[error("no documents to summarize")]
    EmptyCorpus,
}

/// Ordered theme definitions: name and member topic ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThemeMapping {
    pub themes: Vec<(String, Vec<usize>)>,
}

impl ThemeMapping {
    pub fn new(themes: Vec<(String, Vec<usize>)>) -> Result<Self, ThemeError> {
        let m = ThemeMapping { themes };
        m.check_structure()?;
        Ok(m)
    }

    fn check_structure(&self) -> Result<(), ThemeError> {
        let mut names = BTreeSet::new();
        let mut owner: BTreeMap<usize, &str> = BTreeMap::new();
        for (name, topics) in &self.themes {
            if name == UNMAPPED {
                return Err(ThemeError::ReservedName(name.clone()));
            }
            if !names.insert(name.as_str()) {
                return Err(ThemeError::DuplicateTheme(name.clone()));
            }
            if topics.is_empty() {
                return Err(ThemeError::EmptyTheme(name.clone()));
            }
            for &t in topics {
                if let Some(first) = owner.insert(t, name) {
                    return Err(ThemeError::DuplicateTopic { topic: t, first: first.into(), second: name.clone() });
                }
            }
        }
        Ok(())
    }

    /// Theme of a topic, if any.
    pub fn theme_of(&self, topic: usize) -> Option<&str> {
        self.themes.iter().find(|(_, ts)| ts.contains(&topic)).map(|(n, _)| n.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeRow {
    pub theme: String,
    pub topic_ids: Vec<usize>,
    pub count: usize,
    /// Share of all documents, rounded half away from zero to two decimals.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeSummary {
    pub rows: Vec<ThemeRow>,
    pub total: usize,
}

/// Rounds to two decimals, halves away from zero.
pub fn round2(x: f64) -> f64 {
    libm::round(x * 100.0) / 100.0
}

/// Sums topic counts per theme. `topic_counts` holds `(topic id, count)` for
/// every topic in the model; topics outside the mapping are gathered under
/// [`UNMAPPED`], which is only emitted when non-empty.
pub fn aggregate_themes(mapping: &ThemeMapping, topic_counts: &[(usize, usize)]) -> Result<ThemeSummary, ThemeError> {
    mapping.check_structure()?;
    let counts: BTreeMap<usize, usize> = topic_counts.iter().copied().collect();
    let total: usize = counts.values().sum();
    if total == 0 {
        return Err(ThemeError::EmptyCorpus);
    }
    let pct = |c: usize| round2(100.0 * c as f64 / total as f64);

    let mut rows = Vec::with_capacity(mapping.themes.len() + 1);
    let mut claimed = BTreeSet::new();
    for (name, topics) in &mapping.themes {
        let mut count = 0;
        for &t in topics {
            count += *counts.get(&t).ok_or(ThemeError::UnknownTopic { theme: name.clone(), topic: t })?;
            claimed.insert(t);
        }
        rows.push(ThemeRow { theme: name.clone(), topic_ids: topics.clone(), count, percent: pct(count) });
    }
    let rest: Vec<usize> = counts.keys().copied().filter(|t| !claimed.contains(t)).collect();
    if !rest.is_empty() {
        let count = rest.iter().map(|t| counts[t]).sum();
        rows.push(ThemeRow { theme: UNMAPPED.into(), topic_ids: rest, count, percent: pct(count) });
    }
    Ok(ThemeSummary { rows, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn mapping(v: &[(&str, &[usize])]) -> Result<ThemeMapping, ThemeError> {
        ThemeMapping::new(v.iter().map(|(n, t)| (n.to_string(), t.to_vec())).collect())
    }

    #[test]
    fn sums_and_percentages() {
        let m = mapping(&[("a", &[0, 2]), ("b", &[1])]).unwrap();
        let s = aggregate_themes(&m, &[(0, 1), (1, 1), (2, 1), (3, 3)]).unwrap();
        assert_eq!(s.total, 6);
        assert_eq!(s.rows[0].count, 2);
        assert_eq!(s.rows[0].percent, 33.33);
        assert_eq!(s.rows[2].theme, UNMAPPED);
        assert_eq!(s.rows[2].topic_ids, [3]);
        assert_eq!(s.rows[2].percent, 50.0);
    }

    #[test]
    fn rounding_halves_away_from_zero() {
        assert_eq!(round2(0.125), 0.13);
        assert_eq!(round2(2.675000001), 2.68);
        assert_eq!(round2(-0.125), -0.13);
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(mapping(&[("a", &[0]), ("b", &[0])]), Err(ThemeError::DuplicateTopic { topic: 0, .. })));
        assert!(matches!(mapping(&[("a", &[0]), ("a", &[1])]), Err(ThemeError::DuplicateTheme(_))));
        assert!(matches!(mapping(&[(UNMAPPED, &[0])]), Err(ThemeError::ReservedName(_))));
        assert!(matches!(mapping(&[("a", &[])]), Err(ThemeError::EmptyTheme(_))));
        let m = mapping(&[("a", &[7])]).unwrap();
        assert!(matches!(aggregate_themes(&m, &[(0, 1)]), Err(ThemeError::UnknownTopic { topic: 7, .. })));
        assert_eq!(aggregate_themes(&ThemeMapping::default(), &[(0, 0)]), Err(ThemeError::EmptyCorpus));
        assert_eq!(m.theme_of(7), Some("a"));
        assert_eq!(m.theme_of(1), None);
    }
}
