use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::backends::EmbedBackend;

fn default_beta() -> f64 {
    0.8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecallConfig {
    /// Cosine similarity a real attribute's best match must strictly exceed.
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub embedding_model_id: String,
}

impl Default for RecallConfig {
    fn default() -> Self {
        RecallConfig {
            beta: default_beta(),
            embedding_model_id: String::new(),
        }
    }
}

impl RecallConfig {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(AnalysisError::InvalidInput(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (na * nb)
}

/// Fraction of `real` vectors whose most similar `generated` vector has
/// cosine strictly above `beta`.
pub fn recall_from_vectors(
    real: &[Vec<f64>],
    generated: &[Vec<f64>],
    beta: f64,
) -> Result<f64, AnalysisError> {
    if real.is_empty() || generated.is_empty() {
        return Err(AnalysisError::EmptyInput("real or generated attribute list"));
    }
    let matched = real
        .iter()
        .filter(|r| {
            generated
                .iter()
                .map(|g| cosine(r, g))
                .fold(f64::NEG_INFINITY, f64::max)
                > beta
        })
        .count();
    Ok(matched as f64 / real.len() as f64)
}

/// Embeds both attribute lists and computes the matched fraction of `real_attrs`.
pub fn recall<S: AsRef<str>, T: AsRef<str>>(
    real_attrs: &[S],
    gen_attrs: &[T],
    embed: &dyn EmbedBackend,
    config: &RecallConfig,
) -> Result<f64, AnalysisError> {
    config.validate()?;
    if real_attrs.is_empty() || gen_attrs.is_empty() {
        return Err(AnalysisError::EmptyInput("real or generated attribute list"));
    }
    let mut memo: HashMap<String, Vec<f64>> = HashMap::new();
    let mut lookup = |text: &str| -> Result<Vec<f64>, AnalysisError> {
        if let Some(v) = memo.get(text) {
            return Ok(v.clone());
        }
        let v = embed.embed_text(text)?.values;
        memo.insert(text.to_string(), v.clone());
        Ok(v)
    };
    let real = real_attrs
        .iter()
        .map(|a| lookup(a.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let generated = gen_attrs
        .iter()
        .map(|a| lookup(a.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    recall_from_vectors(&real, &generated, config.beta)
}
