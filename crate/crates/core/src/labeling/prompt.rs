use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::LabelError;

pub const DOCUMENTS: &str = "[DOCUMENTS]";
pub const KEYWORDS: &str = "[KEYWORDS]";

/// Sectioned template text shipped with the crate.
pub const DEFAULT_TEMPLATE: &str = include_str!("../../templates/topic_label.txt");

const SECTIONS: [&str; 3] = ["system_prompt", "example_prompt", "main_prompt"];

/// A labeling prompt in three parts. Only `main_prompt` carries the
/// `[DOCUMENTS]` and `[KEYWORDS]` placeholders, each exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub system_prompt: String,
    pub example_prompt: String,
    pub main_prompt: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate::parse(DEFAULT_TEMPLATE).expect("bundled template is valid")
    }
}

fn header_name(line: &str) -> Option<&str> {
    line.strip_prefix("### ")?.strip_suffix(" ###")
}

impl PromptTemplate {
    pub fn new(system_prompt: String, example_prompt: String, main_prompt: String) -> Result<Self, LabelError> {
        let t = PromptTemplate { system_prompt, example_prompt, main_prompt };
        t.validate()?;
        Ok(t)
    }

    /// Parses the sectioned file format: a `### name ###` line opens each
    /// section, and everything up to the next header line is its text,
    /// newlines included.
    pub fn parse(text: &str) -> Result<Self, LabelError> {
        let mut found: [Option<String>; 3] = [None, None, None];
        let mut current: Option<usize> = None;
        let mut buf = String::new();
        let flush = |current: Option<usize>, buf: &mut String, found: &mut [Option<String>; 3]| {
            if let Some(i) = current {
                found[i] = Some(core::mem::take(buf));
            }
        };
        for line in text.split_inclusive('\n') {
            let bare = line.strip_suffix('\n').unwrap_or(line);
            if let Some(name) = header_name(bare) {
                let idx = SECTIONS
                    .iter()
                    .position(|s| *s == name)
                    .ok_or_else(|| LabelError::Template(alloc::format!("unknown section `{name}`")))?;
                if found[idx].is_some() || current == Some(idx) {
                    return Err(LabelError::Template(alloc::format!("section `{name}` repeated")));
                }
                flush(current, &mut buf, &mut found);
                current = Some(idx);
            } else if current.is_some() {
                buf.push_str(line);
            } else if !bare.trim().is_empty() {
                return Err(LabelError::Template(String::from("text before the first section header")));
            }
        }
        flush(current, &mut buf, &mut found);
        let [s, e, m] = found;
        let missing = |i: usize| LabelError::Template(alloc::format!("missing section `{}`", SECTIONS[i]));
        PromptTemplate::new(s.ok_or_else(|| missing(0))?, e.ok_or_else(|| missing(1))?, m.ok_or_else(|| missing(2))?)
    }

    /// Inverse of [`PromptTemplate::parse`].
    pub fn to_file_text(&self) -> String {
        let mut out = String::new();
        for (name, body) in SECTIONS.iter().zip([&self.system_prompt, &self.example_prompt, &self.main_prompt]) {
            out.push_str("### ");
            out.push_str(name);
            out.push_str(" ###\n");
            out.push_str(body);
        }
        out
    }

    pub fn validate(&self) -> Result<(), LabelError> {
        for p in [DOCUMENTS, KEYWORDS] {
            let n = self.main_prompt.matches(p).count();
            if n != 1 {
                return Err(LabelError::Template(alloc::format!("main_prompt has {n} `{p}` placeholders, expected 1")));
            }
            if self.system_prompt.contains(p) || self.example_prompt.contains(p) {
                return Err(LabelError::Template(alloc::format!("`{p}` outside main_prompt")));
            }
        }
        for (name, body) in SECTIONS.iter().zip([&self.system_prompt, &self.example_prompt, &self.main_prompt]) {
            if body.split('\n').any(|l| header_name(l).is_some()) {
                return Err(LabelError::Template(alloc::format!("{name} contains a section header line")));
            }
        }
        Ok(())
    }
}

/// Inputs for one topic's prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRequest {
    pub topic_id: usize,
    pub keywords: Vec<String>,
    pub documents: Vec<String>,
}

impl LabelRequest {
    pub fn new(topic_id: usize, keywords: Vec<String>, documents: Vec<String>) -> Result<Self, LabelError> {
        if keywords.is_empty() || documents.is_empty() {
            return Err(LabelError::EmptyRequest(topic_id));
        }
        Ok(LabelRequest { topic_id, keywords, documents })
    }

    pub fn render(&self, template: &PromptTemplate) -> String {
        build_prompt(template, &self.documents, &self.keywords)
    }
}

/// Renders documents as `- doc` lines joined by newlines.
pub fn render_documents<S: AsRef<str>>(docs: &[S]) -> String {
    let lines: Vec<String> = docs.iter().map(|d| alloc::format!("- {}", d.as_ref())).collect();
    lines.join("\n")
}

/// Full prompt for one topic: system, example, then the main part with the
/// placeholders filled. Substitution is a single left-to-right pass, so
/// placeholder-like text inside documents or keywords is copied verbatim.
pub fn build_prompt<D: AsRef<str>, K: AsRef<str>>(template: &PromptTemplate, docs: &[D], keywords: &[K]) -> String {
    let documents = render_documents(docs);
    let kw: Vec<&str> = keywords.iter().map(AsRef::as_ref).collect();
    let keywords = kw.join(", ");

    let mut out = String::with_capacity(
        template.system_prompt.len() + template.example_prompt.len() + template.main_prompt.len() + documents.len() + keywords.len(),
    );
    out.push_str(&template.system_prompt);
    out.push_str(&template.example_prompt);
    let mut rest = template.main_prompt.as_str();
    loop {
        let next = [(DOCUMENTS, documents.as_str()), (KEYWORDS, keywords.as_str())]
            .into_iter()
            .filter_map(|(p, v)| rest.find(p).map(|at| (at, p, v)))
            .min_by_key(|x| x.0);
        match next {
            Some((at, p, v)) => {
                out.push_str(&rest[..at]);
                out.push_str(v);
                rest = &rest[at + p.len()..];
            }
            None => {
                out.push_str(rest);
                break;
            }
        }
    }
    out
}
