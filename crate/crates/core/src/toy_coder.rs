//! Deterministic stand-in for a pretrained sentence encoder/decoder.
//!
//! Encoding hashes padded character n-grams into `dim` signed buckets
//! (feature hashing) and L2-normalizes the counts. Each n-gram's UTF-8
//! bytes go through XXH3-64 seeded with the config seed; `hash % dim` picks
//! the column and bit 63 picks the sign. Text is padded with `n-1` copies of
//! U+0002 on the left and U+0003 on the right.
//!
//! Decoding is retrieval: the pool sentence with the highest cosine
//! similarity wins, ties going to the lowest pool index.

use std::collections::HashMap;

use thiserror::Error;
use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::corpus::{Lang, Sentence};
use crate::embedding::{Embedding, EmbeddingError, EmbeddingMatrix};

const PAD_START: char = '\u{2}';
const PAD_END: char = '\u{3}';

#[derive(Debug, Error)]
pub enum ToyCoderError {
    #[error("decode pool is empty")]
    EmptyPool,
    #[error("dimension mismatch: pool has {pool}, query has {query}")]
    DimMismatch { pool: usize, query: usize },
    #[error("query embedding is the zero vector")]
    EmptyQuery,
    #[error("duplicate sentence in input: {0:?}")]
    DuplicateSentences(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyCoderConfig {
    pub dim: usize,
    pub seed: u64,
    pub ngram_order: usize,
}

impl Default for ToyCoderConfig {
    fn default() -> Self {
        Self {
            dim: 1024,
            seed: 42,
            ngram_order: 3,
        }
    }
}

impl ToyCoderConfig {
    pub fn validate(&self) -> Result<(), ToyCoderError> {
        if self.dim < 8 {
            return Err(ToyCoderError::InvalidConfig(format!(
                "dim {} < 8",
                self.dim
            )));
        }
        if self.ngram_order < 1 {
            return Err(ToyCoderError::InvalidConfig(
                "ngram_order must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

pub fn toy_encode(text: &str, cfg: &ToyCoderConfig) -> Embedding {
    let mut acc = vec![0.0f64; cfg.dim];
    if !text.is_empty() {
        let n = cfg.ngram_order;
        let chars: Vec<char> = std::iter::repeat_n(PAD_START, n - 1)
            .chain(text.chars())
            .chain(std::iter::repeat_n(PAD_END, n - 1))
            .collect();
        let mut buf = String::new();
        for w in chars.windows(n) {
            buf.clear();
            buf.extend(w);
            let h = xxh3_64_with_seed(buf.as_bytes(), cfg.seed);
            let col = (h % cfg.dim as u64) as usize;
            let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
            acc[col] += sign;
        }
    }
    let norm = acc.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        acc.iter_mut().for_each(|v| *v /= norm);
    }
    Embedding(acc.into_iter().map(|v| v as f32).collect())
}

/// Encodes a batch; row `i` is sentence `i`.
pub fn toy_encode_batch(
    sentences: &[Sentence],
    cfg: &ToyCoderConfig,
    lang: &Lang,
) -> EmbeddingMatrix {
    let mut data = Vec::with_capacity(sentences.len() * cfg.dim);
    for s in sentences {
        data.extend(toy_encode(s.text(), cfg).0);
    }
    EmbeddingMatrix::from_flat(data, cfg.dim, lang.clone()).expect("encoder output is finite")
}

/// Sentences and their encodings, searched by [`toy_decode`].
#[derive(Debug, Clone)]
pub struct DecodePool {
    sentences: Vec<Sentence>,
    embeddings: EmbeddingMatrix,
    norms: Vec<f64>,
}

impl DecodePool {
    pub fn build(sentences: Vec<Sentence>, cfg: &ToyCoderConfig) -> Result<Self, ToyCoderError> {
        cfg.validate()?;
        if sentences.is_empty() {
            return Err(ToyCoderError::EmptyPool);
        }
        let lang = sentences[0].lang().clone();
        let embeddings = toy_encode_batch(&sentences, cfg, &lang);
        Self::from_parts(sentences, embeddings)
    }

    pub fn from_parts(
        sentences: Vec<Sentence>,
        embeddings: EmbeddingMatrix,
    ) -> Result<Self, ToyCoderError> {
        if sentences.is_empty() {
            return Err(ToyCoderError::EmptyPool);
        }
        if sentences.len() != embeddings.rows() {
            return Err(EmbeddingError::RowMismatch(sentences.len(), embeddings.rows()).into());
        }
        let norms = embeddings.iter_rows().map(norm).collect();
        Ok(Self {
            sentences,
            embeddings,
            norms,
        })
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.embeddings.dim()
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn embeddings(&self) -> &EmbeddingMatrix {
        &self.embeddings
    }

    /// Index of the best-matching pool entry.
    pub fn nearest(&self, query: &[f32]) -> Result<usize, ToyCoderError> {
        if query.len() != self.dim() {
            return Err(ToyCoderError::DimMismatch {
                pool: self.dim(),
                query: query.len(),
            });
        }
        let qn = norm(query);
        if qn == 0.0 {
            return Err(ToyCoderError::EmptyQuery);
        }
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, row) in self.embeddings.iter_rows().enumerate() {
            let cos = if self.norms[i] == 0.0 {
                0.0
            } else {
                dot(query, row) / (qn * self.norms[i])
            };
            if cos > best.1 {
                best = (i, cos);
            }
        }
        Ok(best.0)
    }
}

fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let d = norm(a) * norm(b);
    if d == 0.0 {
        0.0
    } else {
        dot(a, b) / d
    }
}

pub fn toy_decode(e: &Embedding, pool: &DecodePool) -> Result<Sentence, ToyCoderError> {
    Ok(pool.sentences[pool.nearest(&e.0)?].clone())
}

/// Decodes every row; output carries the matrix language.
pub fn toy_decode_batch(
    m: &EmbeddingMatrix,
    pool: &DecodePool,
) -> Result<Vec<Sentence>, ToyCoderError> {
    if pool.is_empty() {
        return Err(ToyCoderError::EmptyPool);
    }
    m.iter_rows()
        .map(|r| {
            pool.nearest(r)
                .map(|i| pool.sentences[i].clone().with_lang(m.lang().clone()))
        })
        .collect()
}

/// Sentences that failed to decode back to themselves, as `(index, decoded_as)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundtripAudit {
    pub total: usize,
    pub failures: Vec<(usize, usize)>,
}

impl RoundtripAudit {
    pub fn fraction(&self) -> f64 {
        (self.total - self.failures.len()) as f64 / self.total as f64
    }
}

pub fn roundtrip_audit(
    sentences: &[Sentence],
    cfg: &ToyCoderConfig,
) -> Result<RoundtripAudit, ToyCoderError> {
    let mut seen = HashMap::new();
    for s in sentences {
        if seen.insert(s.text(), ()).is_some() {
            return Err(ToyCoderError::DuplicateSentences(s.text().to_string()));
        }
    }
    let pool = DecodePool::build(sentences.to_vec(), cfg)?;
    let mut failures = Vec::new();
    for (i, row) in pool.embeddings.iter_rows().enumerate() {
        let j = pool.nearest(row)?;
        if j != i {
            log::warn!(
                "round trip collision: {:?} decoded as {:?}",
                sentences[i].text(),
                sentences[j].text()
            );
            failures.push((i, j));
        }
    }
    Ok(RoundtripAudit {
        total: sentences.len(),
        failures,
    })
}

/// Fraction of sentences that decode back to themselves against a pool of
/// the same sentences.
pub fn roundtrip_check(sentences: &[Sentence], cfg: &ToyCoderConfig) -> Result<f64, ToyCoderError> {
    Ok(roundtrip_audit(sentences, cfg)?.fraction())
}
