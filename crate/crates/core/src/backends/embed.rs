use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use super::{BackendError, EmbedBackend, EmbeddingVector};

/// Deterministic embedding mock: a unit vector drawn from a Gaussian RNG
/// seeded with SHA-256 of (model id, text).
#[derive(Clone, Debug)]
pub struct HashEmbedder {
    model_id: String,
    dim: usize,
}

impl HashEmbedder {
    pub fn new(model_id: impl Into<String>, dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        HashEmbedder {
            model_id: model_id.into(),
            dim,
        }
    }
}

impl EmbedBackend for HashEmbedder {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn embed_text(&self, text: &str) -> Result<EmbeddingVector, BackendError> {
        if text.is_empty() {
            return Err(BackendError::InvalidInput("empty text".into()));
        }
        let mut hasher = Sha256::new();
        hasher.update(self.model_id.as_bytes());
        hasher.update([0u8]);
        hasher.update(text.as_bytes());
        let seed: [u8; 32] = hasher.finalize().into();
        let mut rng = ChaCha8Rng::from_seed(seed);
        let mut values: Vec<f64> = (0..self.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        Ok(EmbeddingVector::new(values))
    }
}

/// Embedding mock backed by an explicit text → vector table.
#[derive(Clone, Debug, Default)]
pub struct DictionaryEmbedder {
    model_id: String,
    table: HashMap<String, Vec<f64>>,
}

impl DictionaryEmbedder {
    pub fn new(model_id: impl Into<String>) -> Self {
        DictionaryEmbedder {
            model_id: model_id.into(),
            table: HashMap::new(),
        }
    }

    pub fn insert(&mut self, text: impl Into<String>, values: Vec<f64>) -> &mut Self {
        self.table.insert(text.into(), values);
        self
    }

    /// Maps the i-th text to the i-th standard basis vector of `dim`.
    pub fn orthonormal<S: AsRef<str>>(model_id: &str, texts: &[S], dim: usize) -> Self {
        assert!(texts.len() <= dim, "need dim >= number of texts");
        let mut out = Self::new(model_id);
        for (i, t) in texts.iter().enumerate() {
            let mut v = vec![0.0; dim];
            v[i] = 1.0;
            out.insert(t.as_ref(), v);
        }
        out
    }
}

impl EmbedBackend for DictionaryEmbedder {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn embed_text(&self, text: &str) -> Result<EmbeddingVector, BackendError> {
        self.table
            .get(text)
            .map(|v| EmbeddingVector::new(v.clone()))
            .ok_or_else(|| BackendError::Fixture(format!("no embedding for {text:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_embedding_is_deterministic_unit() {
        let e = HashEmbedder::new("mock", 16);
        let a = e.embed_text("red").unwrap();
        assert_eq!(a, e.embed_text("red").unwrap());
        assert_ne!(a, e.embed_text("blue").unwrap());
        assert_eq!(a.dim(), 16);
        assert!((a.norm() - 1.0).abs() < 1e-12);
        assert_ne!(a, HashEmbedder::new("other", 16).embed_text("red").unwrap());
    }

    #[test]
    fn orthonormal_dictionary() {
        let d = DictionaryEmbedder::orthonormal("dict", &["red", "blue"], 4);
        let r = d.embed_text("red").unwrap();
        let b = d.embed_text("blue").unwrap();
        let dot: f64 = r.values.iter().zip(&b.values).map(|(x, y)| x * y).sum();
        assert_eq!(dot, 0.0);
        assert!(d.embed_text("green").is_err());
    }
}
