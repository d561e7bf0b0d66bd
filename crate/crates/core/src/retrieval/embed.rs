//! Embedding provider contract plus the built-in feature-hashing embedder.
//!
//! The hashing embedder keeps the whole suite offline and deterministic:
//! each token hashes to one of `dimension` signed buckets, counts accumulate,
//! and the vector is L2-normalized. Neural embedders plug in through the
//! same trait, locally or over the wire adapter.

use crate::retrieval::tokenize::tokenize;
use crate::rng::fnv1a;

/// Why an embedding call failed. The built-in embedder never fails; wire
/// providers surface transport and protocol problems here.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("embedding transport failed: {0}")]
    Transport(String),
    #[error("embedding protocol violation: {0}")]
    Malformed(String),
    #[error("provider returned dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// A deterministic text-to-vector function with a stable identity.
pub trait EmbeddingProvider {
    /// Stable identifier embedded in persisted indexes; loading an index
    /// requires a provider with the same id.
    fn id(&self) -> String;
    fn dimension(&self) -> usize;
    /// Deterministic per text. Unit L2 norm except for texts with no
    /// tokens, which embed to the zero vector.
    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError>;
}

/// Seeded feature-hashing bag-of-words embedder; requires no network.
#[derive(Debug, Clone)]
pub struct HashingEmbedder {
    dimension: usize,
}

impl HashingEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension >= 1, "embedding dimension must be positive");
        HashingEmbedder { dimension }
    }
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        HashingEmbedder::new(256)
    }
}

impl EmbeddingProvider for HashingEmbedder {
    fn id(&self) -> String {
        format!("hashing-bow-{}", self.dimension)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, ProviderError> {
        let mut vector = vec![0.0f64; self.dimension];
        for token in tokenize(text) {
            let h = fnv1a(&[token.as_bytes()]);
            let bucket = ((h >> 1) % self.dimension as u64) as usize;
            let sign = if h & 1 == 0 { 1.0 } else { -1.0 };
            vector[bucket] += sign;
        }
        let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for v in &mut vector {
                *v /= norm;
            }
        }
        Ok(vector)
    }
}

/// Cosine similarity; zero vectors score 0 against everything.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
