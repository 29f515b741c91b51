//! Frozen sentence encoders and feature/embedding fusion.
//!
//! Three backends sit behind [`SentenceEncoder`]:
//!
//! - [`HashingEncoder`]: offline and deterministic. Whitespace tokens of the
//!   lower-cased text are hashed to signed basis vectors, summed and
//!   L2-normalised, so the embedding depends only on the token multiset.
//! - [`PrecomputedStore`]: exact-text lookup into a JSON Lines file written by
//!   an offline exporter running a real pretrained model.
//! - [`ExternalEncoder`]: runs an exporter program on demand and memoises its
//!   output.
//!
//! None of them holds trainable state; encoding never mutates the encoder
//! beyond idempotent cache fills.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lexicon::TemplateText;

#[derive(Debug, Error)]
pub enum EncodingError {
    #[error("empty text cannot be encoded")]
    EmptyText,
    #[error("no stored embedding for text with sha256 {0}")]
    LookupMiss(String),
    #[error("embedding store {path}: {message}")]
    Store { path: String, message: String },
    #[error("encoder backend error: {0}")]
    Backend(String),
    #[error("embedding has dimension {actual}, encoder `{name}` declares {expected}")]
    Dimension { name: String, expected: usize, actual: usize },
    #[error("embedding contains non-finite values")]
    NonFinite,
    #[error("text #{index} failed to encode: {source}")]
    Batch {
        index: usize,
        #[source]
        source: Box<EncodingError>,
    },
}

pub type Result<T> = std::result::Result<T, EncodingError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pooling {
    Mean,
    Cls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Hashing,
    Precomputed,
    External,
}

/// Published sentence encoders with their backbone, pooling and width.
pub const PRETRAINED_ENCODERS: [(&str, &str, Pooling, usize); 5] = [
    ("all-mpnet-base-v2", "MPNet", Pooling::Mean, 768),
    ("multi-qa-mpnet-base-dot-v1", "QAMPNet", Pooling::Cls, 768),
    ("all-distilroberta-v1", "DistilRoBERTa", Pooling::Mean, 768),
    ("all-MiniLM-L12-v2", "MiniLM", Pooling::Mean, 384),
    ("multi-qa-distilbert-cos-v1", "DistilBERT", Pooling::Mean, 768),
];

pub const DEFAULT_HASHING_DIM: usize = 384;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub name: String,
    pub dim: usize,
    pub pooling: Pooling,
    pub backend: BackendKind,
}

impl EncoderSpec {
    pub fn hashing(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { name: format!("hashing-{dim}"), dim, pooling: Pooling::Mean, backend: BackendKind::Hashing }
    }

    /// Spec for a published encoder served by a non-hashing backend.
    pub fn pretrained(name: &str, backend: BackendKind) -> Option<Self> {
        PRETRAINED_ENCODERS.iter().find(|e| e.0 == name).map(|&(name, _, pooling, dim)| Self {
            name: name.to_string(),
            dim,
            pooling,
            backend,
        })
    }

    /// Short name used in report rows (`MPNet`, `MiniLM`, ...).
    pub fn display_name(&self) -> &str {
        PRETRAINED_ENCODERS
            .iter()
            .find(|e| e.0 == self.name)
            .map(|e| e.1)
            .unwrap_or(&self.name)
    }

    /// Checks the declared width against the published table for known names.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.dim == 0 {
            return Err("encoder dimension must be positive".into());
        }
        if let Some(known) = PRETRAINED_ENCODERS.iter().find(|e| e.0 == self.name) {
            if known.3 != self.dim {
                return Err(format!("`{}` has dimension {}, not {}", self.name, known.3, self.dim));
            }
        }
        Ok(())
    }
}

impl Default for EncoderSpec {
    fn default() -> Self {
        Self::hashing(DEFAULT_HASHING_DIM)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticEmbedding {
    pub vector: Vec<f64>,
    pub source_text_hash: String,
}

pub fn text_digest(text: &str) -> String {
    crate::io::sha256_hex(text.as_bytes())
}

pub trait SentenceEncoder: Send + Sync {
    fn spec(&self) -> &EncoderSpec;

    /// Raw embedding of `text`. Must be deterministic.
    fn embed(&self, text: &str) -> Result<Vec<f64>>;

    /// Hint that `texts` are about to be encoded; backends that benefit from
    /// batching may fetch them all at once.
    fn prefetch(&self, _texts: &[&str]) -> Result<()> {
        Ok(())
    }
}

/// Encode one template, checking width and finiteness of the result.
pub fn encode(encoder: &dyn SentenceEncoder, text: &TemplateText) -> Result<SemanticEmbedding> {
    encode_str(encoder, &text.text)
}

pub fn encode_str(encoder: &dyn SentenceEncoder, text: &str) -> Result<SemanticEmbedding> {
    if text.is_empty() {
        return Err(EncodingError::EmptyText);
    }
    let vector = encoder.embed(text)?;
    let spec = encoder.spec();
    if vector.len() != spec.dim {
        return Err(EncodingError::Dimension {
            name: spec.name.clone(),
            expected: spec.dim,
            actual: vector.len(),
        });
    }
    if vector.iter().any(|v| !v.is_finite()) {
        return Err(EncodingError::NonFinite);
    }
    Ok(SemanticEmbedding { vector, source_text_hash: text_digest(text) })
}

/// Element-wise [`encode`], order preserved. The first failing text (by
/// position) aborts the batch.
pub fn batch_encode(encoder: &dyn SentenceEncoder, texts: &[TemplateText]) -> Result<Vec<SemanticEmbedding>> {
    let strs: Vec<&str> = texts.iter().map(|t| t.text.as_str()).collect();
    batch_encode_str(encoder, &strs)
}

pub fn batch_encode_str(encoder: &dyn SentenceEncoder, texts: &[&str]) -> Result<Vec<SemanticEmbedding>> {
    encoder.prefetch(texts)?;
    let results: Vec<Result<SemanticEmbedding>> = texts.par_iter().map(|t| encode_str(encoder, t)).collect();
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| r.map_err(|e| EncodingError::Batch { index, source: Box::new(e) }))
        .collect()
}

#[derive(Debug, Clone)]
pub struct HashingEncoder {
    spec: EncoderSpec,
}

impl HashingEncoder {
    pub fn new(dim: usize) -> Self {
        Self { spec: EncoderSpec::hashing(dim) }
    }

    /// Basis index and sign for one token.
    pub fn token_slot(&self, token: &str) -> (usize, f64) {
        let h = Sha256::digest(token.as_bytes());
        let mut idx = [0u8; 8];
        idx.copy_from_slice(&h[..8]);
        let index = (u64::from_le_bytes(idx) % self.spec.dim as u64) as usize;
        let sign = if h[8] & 1 == 0 { 1.0 } else { -1.0 };
        (index, sign)
    }
}

impl SentenceEncoder for HashingEncoder {
    fn spec(&self) -> &EncoderSpec {
        &self.spec
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let mut v = vec![0.0; self.spec.dim];
        for token in text.to_lowercase().split_whitespace() {
            let (i, s) = self.token_slot(token);
            v[i] += s;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(v)
    }
}

/// One line of the precomputed-embedding file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub text: String,
    pub model: String,
    pub dim: usize,
    pub vector: Vec<f64>,
}

/// Exact-text lookup table of embeddings.
#[derive(Debug, Clone)]
pub struct PrecomputedStore {
    spec: EncoderSpec,
    vectors: HashMap<String, Vec<f64>>,
}

impl PrecomputedStore {
    pub fn from_records(spec: EncoderSpec, records: Vec<EmbeddingRecord>, origin: &str) -> Result<Self> {
        let store_err = |message: String| EncodingError::Store { path: origin.to_string(), message };
        let mut vectors = HashMap::with_capacity(records.len());
        for (i, r) in records.into_iter().enumerate() {
            if r.model != spec.name {
                return Err(store_err(format!(
                    "record {}: model `{}` does not match encoder `{}`",
                    i + 1,
                    r.model,
                    spec.name
                )));
            }
            if r.dim != spec.dim || r.vector.len() != spec.dim {
                return Err(store_err(format!(
                    "record {}: declared dim {} / vector length {} but encoder expects {}",
                    i + 1,
                    r.dim,
                    r.vector.len(),
                    spec.dim
                )));
            }
            vectors.insert(r.text, r.vector);
        }
        Ok(Self { spec, vectors })
    }

    pub fn load(spec: EncoderSpec, path: &Path) -> Result<Self> {
        let records: Vec<EmbeddingRecord> = crate::io::read_jsonl(path).map_err(|e| EncodingError::Store {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_records(spec, records, &path.display().to_string())
    }

    pub fn contains(&self, text: &str) -> bool {
        self.vectors.contains_key(text)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

impl SentenceEncoder for PrecomputedStore {
    fn spec(&self) -> &EncoderSpec {
        &self.spec
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        self.vectors
            .get(text)
            .cloned()
            .ok_or_else(|| EncodingError::LookupMiss(text_digest(text)))
    }
}

/// One line of a template dump: a unique template and how often it occurs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateDumpRecord {
    pub text: String,
    pub count: usize,
}

/// Runs an exporter program speaking the
/// `export --model <m> --templates <dump> --out <jsonl>` interface and caches
/// the vectors it returns.
pub struct ExternalEncoder {
    spec: EncoderSpec,
    program: PathBuf,
    model: String,
    cache: RwLock<HashMap<String, Vec<f64>>>,
}

impl ExternalEncoder {
    /// `model` is passed verbatim to `--model`; it is usually the encoder
    /// name or a path to a serialized model snapshot.
    pub fn new(spec: EncoderSpec, program: impl Into<PathBuf>, model: impl Into<String>) -> Self {
        Self { spec, program: program.into(), model: model.into(), cache: RwLock::new(HashMap::new()) }
    }

    fn run_exporter(&self, texts: &[&str]) -> Result<()> {
        let dir = tempfile::tempdir().map_err(|e| EncodingError::Backend(e.to_string()))?;
        let dump = dir.path().join("templates.jsonl");
        let out = dir.path().join("embeddings.jsonl");
        let records: Vec<TemplateDumpRecord> =
            texts.iter().map(|t| TemplateDumpRecord { text: t.to_string(), count: 1 }).collect();
        crate::io::write_jsonl(&dump, &records).map_err(|e| EncodingError::Backend(e.to_string()))?;
        let output = Command::new(&self.program)
            .arg("export")
            .arg("--model")
            .arg(&self.model)
            .arg("--templates")
            .arg(&dump)
            .arg("--out")
            .arg(&out)
            .output()
            .map_err(|e| EncodingError::Backend(format!("cannot run {}: {e}", self.program.display())))?;
        if !output.status.success() {
            return Err(EncodingError::Backend(format!(
                "{} exited with {}: {}",
                self.program.display(),
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            )));
        }
        let store = PrecomputedStore::load(self.spec.clone(), &out)?;
        let mut cache = self.cache.write().expect("encoder cache poisoned");
        for (text, v) in store.vectors {
            cache.entry(text).or_insert(v);
        }
        Ok(())
    }
}

impl SentenceEncoder for ExternalEncoder {
    fn spec(&self) -> &EncoderSpec {
        &self.spec
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        if let Some(v) = self.cache.read().expect("encoder cache poisoned").get(text) {
            return Ok(v.clone());
        }
        self.run_exporter(&[text])?;
        self.cache
            .read()
            .expect("encoder cache poisoned")
            .get(text)
            .cloned()
            .ok_or_else(|| EncodingError::LookupMiss(text_digest(text)))
    }

    fn prefetch(&self, texts: &[&str]) -> Result<()> {
        let missing: Vec<&str> = {
            let cache = self.cache.read().expect("encoder cache poisoned");
            let mut seen = std::collections::HashSet::new();
            texts.iter().copied().filter(|t| !cache.contains_key(*t) && seen.insert(*t)).collect()
        };
        if missing.is_empty() {
            return Ok(());
        }
        self.run_exporter(&missing)
    }
}

/// Memoises another encoder by text digest. Concurrent inserts of the same
/// key write identical values, so races are harmless.
pub struct CachedEncoder {
    inner: Arc<dyn SentenceEncoder>,
    cache: RwLock<HashMap<String, Arc<Vec<f64>>>>,
}

impl CachedEncoder {
    pub fn new(inner: Arc<dyn SentenceEncoder>) -> Self {
        Self { inner, cache: RwLock::new(HashMap::new()) }
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().expect("encoder cache poisoned").len()
    }
}

impl SentenceEncoder for CachedEncoder {
    fn spec(&self) -> &EncoderSpec {
        self.inner.spec()
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>> {
        let key = text_digest(text);
        if let Some(v) = self.cache.read().expect("encoder cache poisoned").get(&key) {
            return Ok(v.as_ref().clone());
        }
        let v = self.inner.embed(text)?;
        self.cache
            .write()
            .expect("encoder cache poisoned")
            .entry(key)
            .or_insert_with(|| Arc::new(v.clone()));
        Ok(v)
    }

    fn prefetch(&self, texts: &[&str]) -> Result<()> {
        self.inner.prefetch(texts)
    }
}

/// `z = [x || s]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedRepresentation {
    pub z: Vec<f64>,
    pub d_features: usize,
    pub d_semantic: usize,
}

impl FusedRepresentation {
    pub fn features(&self) -> &[f64] {
        &self.z[..self.d_features]
    }

    pub fn semantic(&self) -> &[f64] {
        &self.z[self.d_features..]
    }
}

/// Concatenate normalised features and a semantic embedding. Both inputs are
/// expected to be finite.
pub fn fuse(x_norm: &[f64], s: &SemanticEmbedding) -> FusedRepresentation {
    let mut z = Vec::with_capacity(x_norm.len() + s.vector.len());
    z.extend_from_slice(x_norm);
    z.extend_from_slice(&s.vector);
    FusedRepresentation { z, d_features: x_norm.len(), d_semantic: s.vector.len() }
}
