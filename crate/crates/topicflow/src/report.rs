//! Report tables in CSV and JSON, the topic map, the markdown summary, and
//! rating sheets.

use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use topicflow_core::labeling::{RatingSheet, Verdict};
use topicflow_core::ThemeSummary;

use crate::error::{Error, Result};

pub const TERM_COLUMNS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicRecord {
    pub topic_id: usize,
    pub count: usize,
    pub terms: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub topic_id: usize,
    pub count: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThemeRecord {
    pub theme: String,
    pub topic_ids: Vec<usize>,
    pub count: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRecord {
    pub topic_id: usize,
    pub x: f64,
    pub y: f64,
    pub size: usize,
    pub label: String,
}

pub fn theme_records(s: &ThemeSummary) -> Vec<ThemeRecord> {
    s.rows
        .iter()
        .map(|r| ThemeRecord { theme: r.theme.clone(), topic_ids: r.topic_ids.clone(), count: r.count, percent: r.percent })
        .collect()
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::io(path, e.into()))?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = crate::error::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), line: e.line(), msg: e.to_string() })
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { path: path.to_path_buf(), line, msg: e.to_string() }
}

fn write_csv(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| csv_err(path, e))?.iter().map(String::from).collect());
    }
    Ok((header, rows))
}

fn field<T: std::str::FromStr>(path: &Path, line: usize, name: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse { path: path.to_path_buf(), line, msg: format!("bad {name} `{s}`") })
}

fn column(path: &Path, header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Parse { path: path.to_path_buf(), line: 1, msg: format!("missing column `{name}`") })
}

pub fn write_topics(dir: &Path, rows: &[TopicRecord]) -> Result<()> {
    let mut header = vec!["topic_id".to_string(), "count".to_string()];
    header.extend((1..=TERM_COLUMNS).map(|i| format!("term_{i}")));
    let csv_rows = rows.iter().map(|r| {
        let mut v = vec![r.topic_id.to_string(), r.count.to_string()];
        v.extend((0..TERM_COLUMNS).map(|i| r.terms.get(i).cloned().unwrap_or_default()));
        v
    });
    write_csv(&dir.join("topics.csv"), &header, csv_rows)?;
    write_json(&dir.join("topics.json"), rows)
}

pub fn read_topics_csv(path: &Path) -> Result<Vec<TopicRecord>> {
    let (_, rows) = read_csv(path)?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(TopicRecord {
                topic_id: field(path, i + 2, "topic_id", &r[0])?,
                count: field(path, i + 2, "count", &r[1])?,
                terms: r[2..].iter().filter(|t| !t.is_empty()).cloned().collect(),
            })
        })
        .collect()
}

pub fn write_labels(dir: &Path, rows: &[LabelRecord]) -> Result<()> {
    let header = ["topic_id", "count", "label"].map(String::from);
    write_csv(
        &dir.join("labels.csv"),
        &header,
        rows.iter().map(|r| vec![r.topic_id.to_string(), r.count.to_string(), r.label.clone()]),
    )?;
    write_json(&dir.join("labels.json"), rows)
}

pub fn read_labels_csv(path: &Path) -> Result<Vec<LabelRecord>> {
    let (_, rows) = read_csv(path)?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(LabelRecord {
                topic_id: field(path, i + 2, "topic_id", &r[0])?,
                count: field(path, i + 2, "count", &r[1])?,
                label: r[2].clone(),
            })
        })
        .collect()
}

pub fn write_themes(dir: &Path, rows: &[ThemeRecord]) -> Result<()> {
    let header = ["theme", "topic_ids", "count", "percent"].map(String::from);
    let csv_rows = rows.iter().map(|r| {
        let ids: Vec<String> = r.topic_ids.iter().map(usize::to_string).collect();
        vec![r.theme.clone(), ids.join(";"), r.count.to_string(), format!("{:.2}", r.percent)]
    });
    write_csv(&dir.join("themes.csv"), &header, csv_rows)?;
    write_json(&dir.join("themes.json"), rows)
}

pub fn read_themes_csv(path: &Path) -> Result<Vec<ThemeRecord>> {
    let (_, rows) = read_csv(path)?;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let ids = r[1]
                .split(';')
                .filter(|s| !s.is_empty())
                .map(|s| field(path, i + 2, "topic id", s))
                .collect::<Result<_>>()?;
            Ok(ThemeRecord {
                theme: r[0].clone(),
                topic_ids: ids,
                count: field(path, i + 2, "count", &r[2])?,
                percent: field(path, i + 2, "percent", &r[3])?,
            })
        })
        .collect()
}

pub fn write_map(dir: &Path, rows: &[MapRecord]) -> Result<()> {
    write_json(&dir.join("map.json"), rows)
}

fn md_escape(s: &str) -> String {
    s.replace('|', "\\|")
}

pub fn write_markdown(dir: &Path, labels: &[LabelRecord], topics: &[TopicRecord], themes: &[ThemeRecord]) -> Result<()> {
    let mut s = String::from("# Topic report\n\n## Topics\n\n| Topic | Count | Label | Top terms |\n|---|---|---|---|\n");
    for (l, t) in labels.iter().zip(topics) {
        let terms = t.terms.iter().take(5).cloned().collect::<Vec<_>>().join(", ");
        s.push_str(&format!("| {} | {} | {} | {} |\n", l.topic_id, l.count, md_escape(&l.label), md_escape(&terms)));
    }
    if !themes.is_empty() {
        s.push_str("\n## Themes\n\n| Theme | Topics | Count | % |\n|---|---|---|---|\n");
        for r in themes {
            let ids: Vec<String> = r.topic_ids.iter().map(usize::to_string).collect();
            s.push_str(&format!("| {} | {} | {} | {:.2} |\n", md_escape(&r.theme), ids.join(", "), r.count, r.percent));
        }
    }
    let path = dir.join("report.md");
    std::fs::write(&path, s).map_err(|e| Error::io(&path, e))
}

/// Blank sheet for a rater: `topic_id,label,verdict`.
pub fn write_rating_template(path: &Path, labels: &[LabelRecord]) -> Result<()> {
    let header = ["topic_id", "label", "verdict"].map(String::from);
    write_csv(path, &header, labels.iter().map(|l| vec![l.topic_id.to_string(), l.label.clone(), String::new()]))
}

/// Reads a sheet with `topic_id` and `verdict` columns; other columns are
/// ignored. The rater name is the file stem.
pub fn read_rating_sheet(path: &Path) -> Result<RatingSheet> {
    let (header, rows) = read_csv(path)?;
    let (ti, vi) = (column(path, &header, "topic_id")?, column(path, &header, "verdict")?);
    let rater = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut sheet = RatingSheet::new(rater);
    for (i, r) in rows.iter().enumerate() {
        let line = i + 2;
        let id: usize = field(path, line, "topic_id", &r[ti])?;
        let v: Verdict = r[vi]
            .parse()
            .map_err(|e: topicflow_core::labeling::LabelError| Error::Parse { path: path.to_path_buf(), line, msg: e.to_string() })?;
        sheet
            .insert(id, v)
            .map_err(|e| Error::Parse { path: path.to_path_buf(), line, msg: e.to_string() })?;
    }
    Ok(sheet)
}
