use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::{AnalysisError, CrossTab};
use crate::model::{normalize_name, AttributeKind};
use crate::store::AnnotationStore;

pub const UNKNOWN_LABEL: &str = "unknown";
/// Consensus value for images whose leading labels tie; never enters a confusion matrix.
pub const NO_CONSENSUS: &str = "no-consensus";

/// One label selected by one annotator for one image. An annotator who picks
/// several attributes contributes several rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanAnnotation {
    pub image_id: String,
    pub annotator_id: String,
    pub label: String,
}

impl HumanAnnotation {
    /// Reads CSV with header `image_id,annotator_id,label`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Vec<HumanAnnotation>, AnalysisError> {
        csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader)
            .deserialize()
            .map(|r| r.map_err(|e| AnalysisError::InvalidInput(format!("human annotations: {e}"))))
            .collect()
    }
}

/// Consensus label per image: the most selected label; an "unknown" lead
/// gives way to the most selected real label; a tie between real labels
/// yields [`NO_CONSENSUS`]; "unknown" stays only when nothing else was picked.
pub fn consensus_labels(annotations: &[HumanAnnotation]) -> BTreeMap<String, String> {
    let mut counts: BTreeMap<&str, BTreeMap<String, usize>> = BTreeMap::new();
    for a in annotations {
        *counts
            .entry(a.image_id.as_str())
            .or_default()
            .entry(normalize_name(&a.label))
            .or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(image, labels)| {
            let real: Vec<(&String, &usize)> =
                labels.iter().filter(|(l, _)| l.as_str() != UNKNOWN_LABEL).collect();
            let label = match real.iter().map(|(_, &c)| c).max() {
                None => UNKNOWN_LABEL.to_string(),
                Some(top) => {
                    let leaders: Vec<_> = real.iter().filter(|(_, &c)| c == top).collect();
                    if leaders.len() == 1 {
                        leaders[0].0.clone()
                    } else {
                        NO_CONSENSUS.to_string()
                    }
                }
            };
            (image.to_string(), label)
        })
        .collect()
}

/// Machine label per image for an image-level category: the chosen attribute or "none".
pub fn machine_labels(
    store: &AnnotationStore,
    category_name: &str,
) -> Result<BTreeMap<String, String>, AnalysisError> {
    let category = store
        .schema
        .category(category_name)
        .ok_or_else(|| AnalysisError::UnknownCategory(category_name.to_string()))?;
    if category.kind != AttributeKind::ImageLevel {
        return Err(AnalysisError::WrongKind(category_name.to_string(), category.kind));
    }
    Ok(store
        .records_for(category_name)
        .map(|r| (r.image_id.clone(), r.label().to_string()))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfusionMatrix {
    /// Rows are human labels, columns machine labels, normalized per row.
    pub table: CrossTab,
    /// Images dropped for lacking a label on either side or lacking consensus.
    pub excluded: usize,
}

fn ordered_labels<'a>(label_order: &[String], seen: impl Iterator<Item = &'a str>) -> Vec<String> {
    let extras: BTreeSet<&str> = seen.filter(|l| !label_order.iter().any(|o| o == l)).collect();
    label_order
        .iter()
        .cloned()
        .chain(extras.into_iter().map(str::to_string))
        .collect()
}

/// Human-versus-machine confusion over the images both sides labeled.
/// Labels in `label_order` come first in both axes; others follow sorted.
pub fn confusion_matrix(
    human: &BTreeMap<String, String>,
    machine: &BTreeMap<String, String>,
    label_order: &[String],
) -> Result<ConfusionMatrix, AnalysisError> {
    let all_ids: BTreeSet<&String> = human.keys().chain(machine.keys()).collect();
    let pairs: Vec<(&str, &str)> = human
        .iter()
        .filter(|(_, h)| h.as_str() != NO_CONSENSUS)
        .filter_map(|(id, h)| machine.get(id).map(|m| (h.as_str(), m.as_str())))
        .collect();
    if pairs.is_empty() {
        return Err(AnalysisError::EmptyIntersection);
    }
    let rows = ordered_labels(label_order, pairs.iter().map(|p| p.0));
    let cols = ordered_labels(label_order, pairs.iter().map(|p| p.1));
    let mut table = CrossTab::tabulate(
        "",
        &rows,
        cols,
        pairs.iter().map(|&(h, m)| (h, vec![m])),
    );
    // Rows listed in label_order but never observed are expected, not warnings.
    table.omitted_rows.clear();
    Ok(ConfusionMatrix {
        table,
        excluded: all_ids.len() - pairs.len(),
    })
}
