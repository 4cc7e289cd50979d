//! Corpus, keyword, and stop-word files.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};
use topicflow_core::corpus::{Corpus, Document, KeywordSet};

use crate::error::{read_to_string, Error, Result};

/// One line of a corpus file. `clean` is only present in cached,
/// preprocessed corpora.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    id: String,
    text: String,
    ts: String,
    likes: u64,
    retweets: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lang: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    clean: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub records: usize,
    /// 1-based line numbers that failed to parse.
    pub malformed_lines: Vec<usize>,
}

/// Parses an ISO-8601 timestamp. Offsets are honored; timestamps without
/// an offset and bare dates are taken as UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    for f in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, f) {
            return Some(t.and_utc());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok().and_then(|d| d.and_hms_opt(0, 0, 0)).map(|t| t.and_utc())
}

fn to_document(r: Record) -> std::result::Result<Document, String> {
    let ts = parse_timestamp(&r.ts).ok_or_else(|| format!("bad timestamp `{}`", r.ts))?;
    if r.id.is_empty() {
        return Err("empty id".into());
    }
    if let Some(l) = &r.lang {
        if l.chars().count() != 2 {
            return Err(format!("lang `{l}` is not a 2-letter code"));
        }
    }
    let mut d = Document::new(r.id, r.text, ts);
    d.likes = r.likes;
    d.retweets = r.retweets;
    d.lang_hint = r.lang.map(|l| l.to_lowercase());
    d.clean_text = r.clean;
    Ok(d)
}

/// Reads a JSON-lines corpus. Blank lines are skipped. Malformed lines are
/// reported and skipped unless they exceed `max_malformed` as a fraction of
/// non-blank lines, which is fatal.
pub fn ingest_corpus(path: &Path, max_malformed: f64) -> Result<(Corpus, IngestReport)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut docs = Vec::new();
    let mut report = IngestReport::default();
    let mut lines = 0usize;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        lines += 1;
        let parsed = serde_json::from_str::<Record>(&line).map_err(|e| e.to_string()).and_then(to_document);
        match parsed {
            Ok(d) => docs.push(d),
            Err(msg) => {
                log::warn!("{}: line {}: {msg}", path.display(), i + 1);
                report.malformed_lines.push(i + 1);
            }
        }
    }
    if lines == 0 {
        log::warn!("{}: corpus is empty", path.display());
    }
    let bad = report.malformed_lines.len();
    if lines > 0 && bad as f64 / lines as f64 > max_malformed {
        return Err(Error::Malformed { path: path.to_path_buf(), bad, total: lines, lines: report.malformed_lines });
    }
    report.records = docs.len();
    let corpus = Corpus::new(docs, path.display().to_string())?;
    Ok((corpus, report))
}

/// Writes a corpus in the same line format, including cleaned text.
pub fn write_corpus(path: &Path, corpus: &Corpus) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(f);
    for d in corpus.documents() {
        let r = Record {
            id: d.id.clone(),
            text: d.raw_text.clone(),
            ts: d.timestamp.to_rfc3339_opts(chrono::SecondsFormat::AutoSi, true),
            likes: d.likes,
            retweets: d.retweets,
            lang: d.lang_hint.clone(),
            clean: d.clean_text.clone(),
        };
        serde_json::to_writer(&mut w, &r).map_err(|e| Error::io(path, e.into()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Non-blank, non-comment lines of a UTF-8 list file.
fn list_lines(path: &Path) -> Result<Vec<String>> {
    Ok(read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

/// One keyword phrase per line.
pub fn read_keywords(path: &Path) -> Result<KeywordSet> {
    Ok(KeywordSet::from_phrases(list_lines(path)?))
}

pub fn write_keywords(path: &Path, k: &KeywordSet) -> Result<()> {
    let mut s = String::new();
    for p in k.iter() {
        s.push_str(p);
        s.push('\n');
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// One stop word per line, lowercased.
pub fn read_stopwords(path: &Path) -> Result<BTreeSet<String>> {
    Ok(list_lines(path)?.into_iter().map(|w| w.to_lowercase()).collect())
}
