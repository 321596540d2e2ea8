use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::model::{normalize_name, AttributeKind};
use crate::store::AnnotationStore;

/// Rank-based (Mann-Whitney) ROC AUC with average ranks for tied scores.
/// `None` when every label is the same.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<Option<f64>, AnalysisError> {
    if scores.len() != labels.len() {
        return Err(AnalysisError::LengthMismatch(scores.len(), labels.len()));
    }
    if scores.is_empty() {
        return Err(AnalysisError::EmptyInput("score list"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(AnalysisError::InvalidInput("score is NaN".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Ok(None);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j share their mean
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let pos_in_group = order[i..j].iter().filter(|&&k| labels[k]).count();
        rank_sum_pos += avg_rank * pos_in_group as f64;
        i = j;
    }
    let p = positives as f64;
    let n = negatives as f64;
    Ok(Some((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n)))
}

/// Binary labels per (image id, attribute).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroundTruth {
    pub labels: BTreeMap<(String, String), bool>,
}

#[derive(Deserialize)]
struct GroundTruthRow {
    image_id: String,
    attribute: String,
    label: String,
}

impl GroundTruth {
    pub fn insert(&mut self, image_id: impl Into<String>, attribute: &str, label: bool) {
        self.labels
            .insert((image_id.into(), normalize_name(attribute)), label);
    }

    pub fn get(&self, image_id: &str, attribute: &str) -> Option<bool> {
        self.labels
            .get(&(image_id.to_string(), attribute.to_string()))
            .copied()
    }

    /// Reads CSV with header `image_id,attribute,label`, label one of 0/1.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, AnalysisError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut gt = GroundTruth::default();
        for (i, row) in rdr.deserialize::<GroundTruthRow>().enumerate() {
            let row = row.map_err(|e| AnalysisError::InvalidInput(format!("ground truth: {e}")))?;
            let label = match row.label.as_str() {
                "1" => true,
                "0" => false,
                other => {
                    return Err(AnalysisError::InvalidInput(format!(
                        "ground truth row {}: label must be 0 or 1, got {other:?}",
                        i + 2
                    )))
                }
            };
            gt.insert(row.image_id, &row.attribute, label);
        }
        Ok(gt)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttributeAuc {
    pub category_name: String,
    pub attribute: String,
    pub kind: AttributeKind,
    pub positives: usize,
    pub negatives: usize,
    /// `None` for single-class ground truth.
    pub auc: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AucTable {
    pub per_attribute: Vec<AttributeAuc>,
    /// Mean over defined AUCs; `None` when none is defined.
    pub mean: Option<f64>,
}

/// Per-attribute AUC of the stored scores (raw ITM score for image-level
/// attributes, max box score for object-level ones) against `truth`.
pub fn dataset_auc(store: &AnnotationStore, truth: &GroundTruth) -> Result<AucTable, AnalysisError> {
    let mut missing = Vec::new();
    let mut per_attribute = Vec::new();
    for category in &store.schema.categories {
        let records: Vec<_> = store.records_for(&category.name).collect();
        for attr in &category.attributes {
            let mut scores = Vec::with_capacity(records.len());
            let mut labels = Vec::with_capacity(records.len());
            for r in &records {
                match truth.get(&r.image_id, attr) {
                    Some(l) => {
                        scores.push(r.attribute_scores.get(attr).copied().unwrap_or(0.0));
                        labels.push(l);
                    }
                    None => missing.push((r.image_id.clone(), attr.clone())),
                }
            }
            if labels.is_empty() {
                continue;
            }
            let positives = labels.iter().filter(|&&l| l).count();
            per_attribute.push(AttributeAuc {
                category_name: category.name.clone(),
                attribute: attr.clone(),
                kind: category.kind,
                positives,
                negatives: labels.len() - positives,
                auc: auc(&scores, &labels)?,
            });
        }
    }
    if !missing.is_empty() {
        return Err(AnalysisError::Coverage(missing));
    }
    if per_attribute.is_empty() {
        return Err(AnalysisError::EmptyInput("annotation store"));
    }
    let defined: Vec<f64> = per_attribute.iter().filter_map(|a| a.auc).collect();
    let mean = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(AucTable { per_attribute, mean })
}
