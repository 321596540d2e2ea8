use serde::Serialize;

use super::{effective_dimension, recall, AnalysisError, RecallConfig};
use crate::attrgen::SchemaGenerator;
use crate::backends::{ChatBackend, EmbedBackend};
use crate::model::{AttributeSchema, DomainSpec};

/// Schema quality at one (categories, attributes-per-category) setting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub n: u32,
    pub m: u32,
    pub recall: f64,
    pub effective_fraction: f64,
}

/// A grid point and either its measurement or the reason it failed.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub n: u32,
    pub m: u32,
    pub result: Result<SweepPoint, String>,
}

/// Distinct attributes of all categories in schema order.
pub(crate) fn pooled_attributes(schema: &AttributeSchema) -> Vec<String> {
    let mut seen = std::collections::HashSet::new();
    schema
        .categories
        .iter()
        .flat_map(|c| c.attributes.iter())
        .filter(|a| seen.insert(a.as_str()))
        .cloned()
        .collect()
}

/// Generates a schema for every (n, m) on the grid and measures how well the
/// pooled attributes recall `real_attrs` and how many principal directions
/// they span. Failures are recorded per point rather than aborting the sweep.
#[allow(clippy::too_many_arguments)]
pub fn run_sweep<S: AsRef<str>>(
    real_attrs: &[S],
    domain: &DomainSpec,
    n_values: &[u32],
    m_values: &[u32],
    chat: &dyn ChatBackend,
    embed: &dyn EmbedBackend,
    config: &RecallConfig,
    variance_threshold: f64,
) -> Result<Vec<SweepOutcome>, AnalysisError> {
    if n_values.is_empty() || m_values.is_empty() {
        return Err(AnalysisError::EmptyInput("sweep grid"));
    }
    if real_attrs.is_empty() {
        return Err(AnalysisError::EmptyInput("real attribute list"));
    }
    config.validate()?;
    let generator = SchemaGenerator::new(chat);
    let mut out = Vec::with_capacity(n_values.len() * m_values.len());
    for &n in n_values {
        for &m in m_values {
            let point_domain = domain.clone().with_sizes(n, m);
            let result = generator
                .generate(&point_domain)
                .map_err(|e| e.to_string())
                .and_then(|schema| {
                    let pooled = pooled_attributes(&schema);
                    let r = recall(real_attrs, &pooled, embed, config).map_err(|e| e.to_string())?;
                    let d = effective_dimension(&pooled, embed, variance_threshold)
                        .map_err(|e| e.to_string())?;
                    Ok(SweepPoint {
                        n,
                        m,
                        recall: r,
                        effective_fraction: d.fraction,
                    })
                });
            if let Err(e) = &result {
                log::warn!("sweep point n={n} m={m} failed: {e}");
            }
            out.push(SweepOutcome { n, m, result });
        }
    }
    Ok(out)
}
