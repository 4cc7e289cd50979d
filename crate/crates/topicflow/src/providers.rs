//! Embedding providers: deterministic hashing, precomputed files, and an
//! HTTP service.

use std::collections::HashMap;
use std::path::Path;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use topicflow_core::embedding::{hash_embed, EmbeddingError, EmbeddingProviderSpec};
use topicflow_core::labeling::{ProviderError, RetryPolicy};
use topicflow_core::{EmbeddingMatrix, ProviderKind};

use crate::embedfile;
use crate::error::{Error, Result};

/// Overrides `embedding.location` for the http provider.
pub const ENV_EMBED_URL: &str = "TOPICFLOW_EMBED_URL";
/// Optional bearer token sent to the embedding service.
pub const ENV_EMBED_TOKEN: &str = "TOPICFLOW_EMBED_TOKEN";

/// Vectors for one batch plus the dimension the provider reported.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub dim: usize,
    pub vectors: Vec<Vec<f32>>,
}

pub trait Embedder: Sync {
    fn id(&self) -> String;
    /// Embeds a batch of non-empty texts, rows in input order.
    fn embed_batch(&self, texts: &[&str]) -> Result<Batch, ProviderError>;
}

#[derive(Debug, Clone, Copy)]
pub struct HashEmbedder {
    pub seed: u64,
    pub dim: usize,
}

impl Embedder for HashEmbedder {
    fn id(&self) -> String {
        format!("hash-test:seed={}:dim={}", self.seed, self.dim)
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Batch, ProviderError> {
        let vectors = texts.iter().map(|t| hash_embed(t, self.seed, self.dim).vector).collect();
        Ok(Batch { dim: self.dim, vectors })
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
    normalize: bool,
}

#[derive(Deserialize)]
struct EmbedResponse {
    dim: usize,
    vectors: Vec<Vec<f32>>,
    #[serde(default)]
    model: String,
}

/// Client for a service exposing `POST /embed` and `GET /health`.
pub struct HttpEmbedder {
    base: String,
    model: String,
    token: Option<String>,
    agent: ureq::Agent,
}

/// Sorts an HTTP status into the retry classes.
pub fn classify_status(status: u16, body: &str) -> ProviderError {
    let msg = format!("HTTP {status}: {}", body.chars().take(200).collect::<String>());
    match status {
        401 | 403 => ProviderError::Auth(msg),
        408 | 429 | 500..=599 => ProviderError::Transient(msg),
        _ => ProviderError::Fatal(msg),
    }
}

pub fn transport_error(e: ureq::Error) -> ProviderError {
    match e {
        ureq::Error::Json(e) => ProviderError::Fatal(format!("malformed response: {e}")),
        e => ProviderError::Transient(e.to_string()),
    }
}

pub fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder().timeout_global(Some(timeout)).http_status_as_error(false).build().into()
}

impl HttpEmbedder {
    pub fn new(base: &str, model: &str, token: Option<String>, timeout: Duration) -> Self {
        HttpEmbedder {
            base: base.trim_end_matches('/').to_string(),
            model: model.to_string(),
            token,
            agent: agent(timeout),
        }
    }

    pub fn health(&self) -> Result<(), ProviderError> {
        let mut resp = self.agent.get(format!("{}/health", self.base)).call().map_err(transport_error)?;
        let status = resp.status().as_u16();
        if status == 200 {
            return Ok(());
        }
        let body = resp.body_mut().read_to_string().unwrap_or_default();
        Err(classify_status(status, &body))
    }
}

impl Embedder for HttpEmbedder {
    fn id(&self) -> String {
        format!("http:{}:{}", self.base, self.model)
    }

    fn embed_batch(&self, texts: &[&str]) -> Result<Batch, ProviderError> {
        let mut req = self.agent.post(format!("{}/embed", self.base));
        if let Some(t) = &self.token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        let mut resp = req.send_json(EmbedRequest { texts, normalize: true }).map_err(transport_error)?;
        let status = resp.status().as_u16();
        if status != 200 {
            let body = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(classify_status(status, &body));
        }
        let r: EmbedResponse = resp.body_mut().read_json().map_err(transport_error)?;
        if !self.model.is_empty() && !r.model.is_empty() && r.model != self.model {
            log::warn!("embedding service reports model `{}`, configured `{}`", r.model, self.model);
        }
        Ok(Batch { dim: r.dim, vectors: r.vectors })
    }
}

/// Calls `f` until it succeeds, fails non-transiently, or runs out of
/// attempts, sleeping with exponential backoff between tries.
pub fn with_retry<T>(policy: &RetryPolicy, mut f: impl FnMut() -> Result<T, ProviderError>) -> Result<T, ProviderError> {
    let attempts = policy.max_attempts.max(1);
    let mut retry = 0;
    loop {
        match f() {
            Err(ProviderError::Transient(msg)) if retry + 1 < attempts => {
                retry += 1;
                log::warn!("transient provider error, retry {retry}: {msg}");
                thread::sleep(policy.delay(retry));
            }
            other => return other,
        }
    }
}

/// Embedding output together with the documents that had no text.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedded {
    pub matrix: EmbeddingMatrix,
    pub empty_ids: Vec<String>,
    pub provider_id: String,
}

/// Embeds `texts` in batches. Empty texts get zero vectors and are never
/// sent. Batches run on up to `workers` threads; row order always follows
/// the input.
pub fn embed_all(
    embedder: &dyn Embedder,
    ids: &[String],
    texts: &[&str],
    dim: usize,
    batch_size: usize,
    workers: usize,
    policy: &RetryPolicy,
) -> Result<Embedded> {
    let nonempty: Vec<usize> = (0..texts.len()).filter(|&i| !texts[i].trim().is_empty()).collect();
    let batches: Vec<&[usize]> = nonempty.chunks(batch_size.max(1)).collect();
    let run = |idx: &&[usize]| -> Result<Vec<Vec<f32>>> {
        let batch: Vec<&str> = idx.iter().map(|&i| texts[i]).collect();
        let out = with_retry(policy, || embedder.embed_batch(&batch)).map_err(|e| Error::Provider(e.to_string()))?;
        if out.dim != dim {
            return Err(EmbeddingError::DimensionMismatch { expected: dim, actual: out.dim }.into());
        }
        if out.vectors.len() != batch.len() {
            return Err(Error::Provider(format!("{} vectors returned for {} texts", out.vectors.len(), batch.len())));
        }
        if let Some(v) = out.vectors.iter().find(|v| v.len() != dim) {
            return Err(EmbeddingError::DimensionMismatch { expected: dim, actual: v.len() }.into());
        }
        Ok(out.vectors)
    };
    let results: Vec<Vec<Vec<f32>>> = if workers <= 1 || batches.len() <= 1 {
        batches.iter().map(run).collect::<Result<_>>()?
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::Pipeline(e.to_string()))?;
        pool.install(|| batches.par_iter().map(run).collect::<Result<_>>())?
    };

    let mut data = vec![0.0f32; texts.len() * dim];
    for (idx, vecs) in batches.iter().zip(results) {
        for (&i, v) in idx.iter().zip(vecs) {
            data[i * dim..(i + 1) * dim].copy_from_slice(&v);
        }
    }
    let empty_ids: Vec<String> = (0..texts.len()).filter(|i| texts[*i].trim().is_empty()).map(|i| ids[i].clone()).collect();
    if !empty_ids.is_empty() {
        log::warn!("{} documents had no text and were given zero vectors", empty_ids.len());
    }
    Ok(Embedded { matrix: EmbeddingMatrix::new(dim, ids.to_vec(), data)?, empty_ids, provider_id: embedder.id() })
}

/// Takes rows from a precomputed file, reordered to match `ids`.
pub fn embed_from_file(path: &Path, ids: &[String], dim: usize) -> Result<Embedded> {
    let m = embedfile::load(path)?;
    m.expect_dim(dim)?;
    let index: HashMap<&str, usize> = m.doc_ids().iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut data = Vec::with_capacity(ids.len() * dim);
    let mut missing = Vec::new();
    for id in ids {
        match index.get(id.as_str()) {
            Some(&r) => data.extend_from_slice(m.row(r)),
            None => missing.push(id.as_str()),
        }
    }
    if !missing.is_empty() {
        let shown: Vec<&str> = missing.iter().take(10).copied().collect();
        return Err(Error::Provider(format!(
            "{}: no vectors for {} documents ({}{})",
            path.display(),
            missing.len(),
            shown.join(", "),
            if missing.len() > 10 { ", ..." } else { "" }
        )));
    }
    let matrix = EmbeddingMatrix::new(dim, ids.to_vec(), data)?;
    let empty_ids = matrix.zero_rows().into_iter().map(|i| ids[i].clone()).collect();
    Ok(Embedded { matrix, empty_ids, provider_id: format!("file:{}", path.display()) })
}

/// Runs the provider selected by `spec`.
pub fn embed_corpus(
    spec: &EmbeddingProviderSpec,
    ids: &[String],
    texts: &[&str],
    workers: usize,
    policy: &RetryPolicy,
    timeout: Duration,
) -> Result<Embedded> {
    match spec.kind {
        ProviderKind::HashTest => {
            let e = HashEmbedder { seed: spec.seed, dim: spec.dim };
            embed_all(&e, ids, texts, spec.dim, spec.batch_size, workers, policy)
        }
        ProviderKind::File => {
            let loc = spec.location.as_deref().ok_or_else(|| Error::Config(vec!["embedding.location: required for the file provider".into()]))?;
            embed_from_file(Path::new(loc), ids, spec.dim)
        }
        ProviderKind::Http => {
            let url = std::env::var(ENV_EMBED_URL)
                .ok()
                .or_else(|| spec.location.clone())
                .ok_or_else(|| Error::Config(vec![format!("embedding.location: required for the http provider (or set {ENV_EMBED_URL})")]))?;
            let e = HttpEmbedder::new(&url, &spec.model_name, std::env::var(ENV_EMBED_TOKEN).ok(), timeout);
            with_retry(policy, || e.health()).map_err(|err| Error::Provider(format!("health check failed: {err}")))?;
            embed_all(&e, ids, texts, spec.dim, spec.batch_size, workers, policy)
        }
    }
}
