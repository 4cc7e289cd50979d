use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::time::Duration;

use serde::{Deserialize, Serialize};

use super::LabelError;

/// Longest label kept, in characters, before truncation.
pub const MAX_LABEL_CHARS: usize = 120;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    /// Timeouts, rate limits, 5xx. Worth retrying.
    #[error("transient: {0}")]
    Transient(String),
    /// Bad or missing credentials. Aborts the run.
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("{0}")]
    Fatal(String),
}

/// Anything that turns a prompt into a completion.
pub trait LabelProvider {
    /// Identifier recorded in the run manifest.
    fn id(&self) -> String;
    fn complete(&self, prompt: &str) -> Result<String, ProviderError>;
}

/// Offline labeler: answers with the first four keywords of the last
/// `keywords: '...'` line in the prompt.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubProvider;

impl LabelProvider for StubProvider {
    fn id(&self) -> String {
        "stub".to_string()
    }

    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        const MARK: &str = "keywords: '";
        let start = prompt.rfind(MARK).ok_or_else(|| ProviderError::Fatal("no keyword line in prompt".into()))?
            + MARK.len();
        let end = prompt[start..]
            .find("'.")
            .or_else(|| prompt[start..].find('\''))
            .map_or(prompt.len(), |e| start + e);
        let words: Vec<&str> = prompt[start..end].split(", ").filter(|w| !w.is_empty()).take(4).collect();
        if words.is_empty() {
            return Err(ProviderError::Fatal("empty keyword line".into()));
        }
        Ok(words.join(" "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    /// Total attempts, including the first.
    pub max_attempts: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_attempts: 3, base_delay_ms: 500 }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based): `base * 2^(retry-1)`.
    pub fn delay(&self, retry: u32) -> Duration {
        Duration::from_millis(self.base_delay_ms.saturating_mul(1u64 << retry.saturating_sub(1).min(20)))
    }
}

/// Completion plus how many retries it took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub retries: u32,
}

/// Calls the provider, retrying transient failures with exponential backoff.
/// `sleep` is injected so callers and tests control real time.
pub fn request_completion<P: LabelProvider + ?Sized>(
    provider: &P,
    prompt: &str,
    policy: &RetryPolicy,
    mut sleep: impl FnMut(Duration),
) -> Result<Completion, ProviderError> {
    let attempts = policy.max_attempts.max(1);
    let mut retries = 0;
    loop {
        match provider.complete(prompt) {
            Ok(text) => return Ok(Completion { text, retries }),
            Err(ProviderError::Transient(msg)) => {
                if retries + 1 >= attempts {
                    return Err(ProviderError::Transient(msg));
                }
                retries += 1;
                sleep(policy.delay(retries));
            }
            Err(e) => return Err(e),
        }
    }
}

fn strip_wrapping(s: &str) -> &str {
    let pairs = [('"', '"'), ('\'', '\''), ('`', '`'), ('“', '”'), ('‘', '’'), ('[', ']'), ('(', ')'), ('{', '}')];
    for (open, close) in pairs {
        if let Some(inner) = s.strip_prefix(open).and_then(|r| r.strip_suffix(close)) {
            return inner.trim();
        }
    }
    s
}

/// Cleans a raw completion: trims, drops one layer of surrounding quotes or
/// brackets, folds line breaks into spaces, and caps the length.
pub fn parse_label(raw: &str) -> Result<String, LabelError> {
    let inner = strip_wrapping(raw.trim());
    let folded: Vec<&str> = inner.split_whitespace().collect();
    let label = folded.join(" ");
    if label.is_empty() {
        return Err(LabelError::EmptyLabel);
    }
    Ok(truncate_label(&label, MAX_LABEL_CHARS))
}

/// Cuts at the last word boundary within `max` characters and appends `…`.
pub fn truncate_label(label: &str, max: usize) -> String {
    if label.chars().count() <= max {
        return label.to_string();
    }
    let cut: String = label.chars().take(max.saturating_sub(1)).collect();
    let kept = match cut.rfind(' ') {
        Some(i) if i > 0 => cut[..i].trim_end(),
        _ => cut.as_str(),
    };
    let mut out = kept.to_string();
    out.push('…');
    out
}

/// Label used when the provider gives up: the top terms, space-joined.
pub fn fallback_label<S: AsRef<str>>(top_terms: &[S]) -> String {
    let words: Vec<&str> = top_terms.iter().take(4).map(AsRef::as_ref).collect();
    truncate_label(&words.join(" "), MAX_LABEL_CHARS)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelSource {
    Provider,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicLabel {
    pub topic_id: usize,
    pub label: String,
    pub source: LabelSource,
    pub retries: u32,
    /// Why the fallback was used.
    pub error: Option<String>,
}

/// Labels one topic. Authentication failures are returned as errors; every
/// other failure falls back to the top terms.
pub fn label_topic<P: LabelProvider + ?Sized>(
    provider: &P,
    topic_id: usize,
    prompt: &str,
    top_terms: &[String],
    policy: &RetryPolicy,
    sleep: impl FnMut(Duration),
) -> Result<TopicLabel, LabelError> {
    let fallback = |retries, error: String| TopicLabel {
        topic_id,
        label: fallback_label(top_terms),
        source: LabelSource::Fallback,
        retries,
        error: Some(error),
    };
    match request_completion(provider, prompt, policy, sleep) {
        Ok(c) => Ok(match parse_label(&c.text) {
            Ok(label) => TopicLabel { topic_id, label, source: LabelSource::Provider, retries: c.retries, error: None },
            Err(e) => fallback(c.retries, e.to_string()),
        }),
        Err(ProviderError::Auth(msg)) => Err(LabelError::Auth(msg)),
        Err(e) => Ok(fallback(policy.max_attempts.max(1) - 1, e.to_string())),
    }
}
