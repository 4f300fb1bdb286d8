//! Embedding providers.
//!
//! The pipeline never links an embedding model; it talks to an
//! [`EmbeddingProvider`]. The deterministic [`TestEmbedder`] lives here so
//! the whole pipeline runs hermetically; file- and service-backed providers
//! live in the companion crate.

use crate::hashing;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbedError {
    /// No texts to embed.
    EmptyInput,
    /// A backend returned or declared an inconsistent dimension.
    DimensionMismatch { expected: usize, got: usize },
    /// The precomputed file has no vector for this text.
    MissingKey { text_hash: String },
    /// The service backend failed; carries a human-readable reason.
    ProviderUnavailable { reason: String },
    /// A backend produced a NaN or infinite component.
    NonFiniteComponent { index: usize },
}

impl fmt::Display for EmbedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmbedError::EmptyInput => f.write_str("embed_texts called with no texts"),
            EmbedError::DimensionMismatch { expected, got } => {
                write!(
                    f,
                    "embedding dimension mismatch: expected {expected}, got {got}"
                )
            }
            EmbedError::MissingKey { text_hash } => {
                write!(f, "no precomputed vector for text hash {text_hash}")
            }
            EmbedError::ProviderUnavailable { reason } => {
                write!(f, "embedding provider unavailable: {reason}")
            }
            EmbedError::NonFiniteComponent { index } => {
                write!(f, "embedding component {index} is not finite")
            }
        }
    }
}

impl core::error::Error for EmbedError {}

/// A source of fixed-dimension embedding vectors.
///
/// Contract: one vector per input text, order preserved, identical texts get
/// identical vectors within one provider, all components finite, and every
/// vector has exactly `dim()` components. Implementations must tolerate
/// concurrent calls (pure or internally synchronized).
pub trait EmbeddingProvider: Send + Sync {
    /// Vector dimension, uniform for the provider's lifetime.
    fn dim(&self) -> usize;

    /// A stable description of the backend for run manifests.
    fn identity(&self) -> String;

    fn embed_texts(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, EmbedError>;
}

/// Checks the provider contract on a batch of returned vectors.
pub fn validate_vectors(vectors: &[Vec<f64>], dim: usize) -> Result<(), EmbedError> {
    for v in vectors {
        if v.len() != dim {
            return Err(EmbedError::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        for (i, &x) in v.iter().enumerate() {
            if !x.is_finite() {
                return Err(EmbedError::NonFiniteComponent { index: i });
            }
        }
    }
    Ok(())
}

/// Deterministic unit-vector embedder for hermetic tests and offline runs.
///
/// Each text maps to a pseudo-random point on the unit sphere derived solely
/// from `(seed, text bytes)`: SHA-256 in counter mode over
/// `seed_le || text` yields a byte stream, consecutive 8-byte words become
/// uniform doubles, Box-Muller turns them into standard normals, and the
/// normal vector is L2-normalized. Bit-identical across platforms and runs.
#[derive(Debug, Clone)]
pub struct TestEmbedder {
    seed: u64,
    dim: usize,
}

impl TestEmbedder {
    /// `dim` must be at least 2.
    pub fn new(seed: u64, dim: usize) -> TestEmbedder {
        assert!(dim >= 2, "test embedder dimension must be >= 2");
        TestEmbedder { seed, dim }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn embed_one(&self, text: &str) -> Vec<f64> {
        let mut key = Vec::with_capacity(8 + text.len());
        key.extend_from_slice(&self.seed.to_le_bytes());
        key.extend_from_slice(text.as_bytes());
        // Two uniforms per normal via Box-Muller.
        let mut stream = Vec::new();
        hashing::counter_stream(&key, &mut stream, self.dim * 16);
        let mut v = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let u1 = word_to_unit(&stream[i * 16..i * 16 + 8]);
            let u2 = word_to_unit(&stream[i * 16 + 8..i * 16 + 16]);
            let u1 = if u1 <= 0.0 { f64::MIN_POSITIVE } else { u1 };
            let r = libm::sqrt(-2.0 * libm::log(u1));
            v.push(r * libm::cos(2.0 * core::f64::consts::PI * u2));
        }
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
        if norm < 1e-12 {
            // Astronomically unlikely; pin to a fixed axis rather than divide
            // by ~zero.
            let mut unit = alloc::vec![0.0; self.dim];
            unit[0] = 1.0;
            return unit;
        }
        v.iter().map(|x| x / norm).collect()
    }
}

fn word_to_unit(bytes: &[u8]) -> f64 {
    let mut word = [0u8; 8];
    word.copy_from_slice(bytes);
    (u64::from_le_bytes(word) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

impl EmbeddingProvider for TestEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn identity(&self) -> String {
        format!("test(seed={},dim={})", self.seed, self.dim)
    }

    fn embed_texts(&self, texts: &[&str]) -> Result<Vec<Vec<f64>>, EmbedError> {
        if texts.is_empty() {
            return Err(EmbedError::EmptyInput);
        }
        let vectors: Vec<Vec<f64>> = texts.iter().map(|t| self.embed_one(t)).collect();
        validate_vectors(&vectors, self.dim)?;
        Ok(vectors)
    }
}
