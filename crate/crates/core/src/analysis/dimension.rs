use std::collections::HashMap;

use super::{eigen::symmetric_eigenvalues, AnalysisError};
use crate::backends::EmbedBackend;

const EIGEN_TOL: f64 = 1e-12;
// Total variance below this fraction of the mean squared norm counts as zero.
const DEGENERATE_REL: f64 = 1e-12;

/// Principal-component summary of a set of attribute embeddings.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveDimension {
    /// Components needed to reach the variance threshold; 0 when there is no variance.
    pub k: usize,
    /// `k` divided by the number of attributes.
    pub fraction: f64,
    /// Covariance eigenvalues in descending order (negative round-off clamped
    /// to 0), `min(n, dim)` of them.
    pub explained_variance: Vec<f64>,
    pub total_variance: f64,
}

/// Effective dimension of raw vectors: mean-centers them, takes the covariance
/// spectrum (through the smaller of the `dim × dim` covariance and the `n × n`
/// Gram matrix) and counts the leading components whose cumulative variance
/// reaches `variance_threshold` of the total.
pub fn effective_dimension_of(
    vectors: &[Vec<f64>],
    variance_threshold: f64,
) -> Result<EffectiveDimension, AnalysisError> {
    let n = vectors.len();
    if n == 0 {
        return Err(AnalysisError::EmptyInput("attribute list"));
    }
    if !(variance_threshold > 0.0 && variance_threshold <= 1.0) {
        return Err(AnalysisError::InvalidInput(format!(
            "variance threshold must lie in (0, 1], got {variance_threshold}"
        )));
    }
    let dim = vectors[0].len();
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(AnalysisError::DimensionMismatch(dim, v.len()));
    }

    let mut mean = vec![0.0; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let centered: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.iter().zip(&mean).map(|(x, m)| x - m).collect())
        .collect();

    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let (matrix, size) = if n <= dim {
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                g[i * n + j] = dot / denom;
                g[j * n + i] = dot / denom;
            }
        }
        (g, n)
    } else {
        let mut c = vec![0.0; dim * dim];
        for row in &centered {
            for a in 0..dim {
                for b in a..dim {
                    c[a * dim + b] += row[a] * row[b];
                }
            }
        }
        for a in 0..dim {
            for b in a..dim {
                c[a * dim + b] /= denom;
                c[b * dim + a] = c[a * dim + b];
            }
        }
        (c, dim)
    };

    let explained_variance: Vec<f64> = symmetric_eigenvalues(&matrix, size, EIGEN_TOL)
        .into_iter()
        .map(|e| e.max(0.0))
        .collect();
    let total_variance: f64 = explained_variance.iter().sum();
    let scale = vectors
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>())
        .sum::<f64>()
        / n as f64;

    let k = if total_variance == 0.0 || total_variance <= DEGENERATE_REL * scale {
        0
    } else {
        let target = variance_threshold * total_variance;
        let mut cumulative = 0.0;
        explained_variance
            .iter()
            .position(|e| {
                cumulative += e;
                cumulative >= target
            })
            .map_or(explained_variance.len(), |i| i + 1)
    };
    Ok(EffectiveDimension {
        k,
        fraction: k as f64 / n as f64,
        explained_variance,
        total_variance,
    })
}

/// Embeds `attrs` and returns their effective dimension.
pub fn effective_dimension<S: AsRef<str>>(
    attrs: &[S],
    embed: &dyn EmbedBackend,
    variance_threshold: f64,
) -> Result<EffectiveDimension, AnalysisError> {
    if attrs.is_empty() {
        return Err(AnalysisError::EmptyInput("attribute list"));
    }
    let mut memo: HashMap<&str, Vec<f64>> = HashMap::new();
    let mut vectors = Vec::with_capacity(attrs.len());
    for a in attrs {
        let a = a.as_ref();
        if !memo.contains_key(a) {
            memo.insert(a, embed.embed_text(a)?.values);
        }
        vectors.push(memo[a].clone());
    }
    effective_dimension_of(&vectors, variance_threshold)
}
