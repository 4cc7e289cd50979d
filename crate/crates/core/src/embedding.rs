//! Document embedding matrices and the deterministic hashing embedder.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::hash::Hasher;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use siphasher::sip::SipHasher13;

pub const DEFAULT_DIM: usize = 384;
pub const DEFAULT_MODEL: &str = "paraphrase-multilingual-MiniLM-L12-v2";

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EmbeddingError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("{rows} rows for {ids} document ids")]
    RowCount { rows: usize, ids: usize },
    #[error("non-finite value in row {row}")]
    NonFinite { row: usize },
    #[error("dimension must be positive")]
    ZeroDim,
}

/// Row-major `n x dim` matrix of `f32` document vectors, aligned with `doc_ids`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    doc_ids: Vec<String>,
    data: Vec<f32>,
}

impl EmbeddingMatrix {
    pub fn new(dim: usize, doc_ids: Vec<String>, data: Vec<f32>) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::ZeroDim);
        }
        if data.len() % dim != 0 {
            return Err(EmbeddingError::DimensionMismatch { expected: dim, actual: data.len() % dim });
        }
        let rows = data.len() / dim;
        if rows != doc_ids.len() {
            return Err(EmbeddingError::RowCount { rows, ids: doc_ids.len() });
        }
        if let Some(row) = data.chunks(dim).position(|r| r.iter().any(|v| !v.is_finite())) {
            return Err(EmbeddingError::NonFinite { row });
        }
        Ok(EmbeddingMatrix { dim, doc_ids, data })
    }

    /// Builds a matrix from rows, checking each row against `dim`.
    pub fn from_rows(dim: usize, doc_ids: Vec<String>, rows: &[Vec<f32>]) -> Result<Self, EmbeddingError> {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(EmbeddingError::DimensionMismatch { expected: dim, actual: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(dim, doc_ids, data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.doc_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_ids.is_empty()
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f32]> {
        self.data.chunks(self.dim)
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn expect_dim(&self, dim: usize) -> Result<(), EmbeddingError> {
        if self.dim == dim {
            Ok(())
        } else {
            Err(EmbeddingError::DimensionMismatch { expected: dim, actual: self.dim })
        }
    }

    /// Indices of all-zero rows (empty-text embeddings).
    pub fn zero_rows(&self) -> Vec<usize> {
        self.rows()
            .enumerate()
            .filter(|(_, r)| r.iter().all(|&v| v == 0.0))
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProviderKind {
    File,
    Http,
    HashTest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingProviderSpec {
    pub kind: ProviderKind,
    /// Path for `file`, URL for `http`; unused by `hash-test`.
    pub location: Option<String>,
    pub model_name: String,
    pub batch_size: usize,
    pub dim: usize,
    /// Seed for `hash-test`.
    pub seed: u64,
}

impl Default for EmbeddingProviderSpec {
    fn default() -> Self {
        EmbeddingProviderSpec {
            kind: ProviderKind::HashTest,
            location: None,
            model_name: String::from(DEFAULT_MODEL),
            batch_size: 64,
            dim: DEFAULT_DIM,
            seed: 0,
        }
    }
}

impl EmbeddingProviderSpec {
    /// Reports which required fields are missing for the chosen kind.
    pub fn problems(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if matches!(self.kind, ProviderKind::File | ProviderKind::Http) && self.location.is_none() {
            out.push("location is required for file and http providers");
        }
        if self.kind == ProviderKind::Http && self.model_name.is_empty() {
            out.push("model_name is required for the http provider");
        }
        if self.batch_size == 0 {
            out.push("batch_size must be positive");
        }
        if self.dim == 0 {
            out.push("dim must be positive");
        }
        out
    }
}

/// Result of [`hash_embed`]. `empty` is set when the text had no tokens and
/// the vector is all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct HashEmbedding {
    pub vector: Vec<f32>,
    pub empty: bool,
}

fn token_seed(token: &str, seed: u64) -> u64 {
    let mut h = SipHasher13::new_with_keys(seed, 0x746f_7069_6366_6c6f);
    h.write(token.as_bytes());
    h.finish()
}

/// Bag-of-tokens random projection: each whitespace token maps to a seeded
/// standard-normal vector; the sum is L2-normalized.
pub fn hash_embed(text: &str, seed: u64, dim: usize) -> HashEmbedding {
    assert!(dim >= 2, "hash_embed needs dim >= 2");
    let mut acc = vec![0.0f64; dim];
    let mut any = false;
    for tok in text.split_whitespace() {
        any = true;
        let mut rng = ChaCha8Rng::seed_from_u64(token_seed(tok, seed));
        for a in acc.iter_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *a += z;
        }
    }
    let norm = libm::sqrt(acc.iter().map(|v| v * v).sum::<f64>());
    if !any || norm == 0.0 {
        return HashEmbedding { vector: vec![0.0; dim], empty: true };
    }
    HashEmbedding {
        vector: acc.iter().map(|v| (v / norm) as f32).collect(),
        empty: false,
    }
}

/// Embeds every text with [`hash_embed`], preserving order.
pub fn hash_embed_all<'a>(
    ids: impl IntoIterator<Item = String>,
    texts: impl IntoIterator<Item = &'a str>,
    seed: u64,
    dim: usize,
) -> Result<EmbeddingMatrix, EmbeddingError> {
    let ids: Vec<String> = ids.into_iter().collect();
    let mut data = Vec::with_capacity(ids.len() * dim);
    for t in texts {
        data.extend(hash_embed(t, seed, dim).vector);
    }
    EmbeddingMatrix::new(dim, ids, data)
}
