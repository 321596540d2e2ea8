use std::collections::{BTreeSet, HashMap};

use indexmap::IndexMap;
use serde::Serialize;

use super::AnalysisError;
use crate::model::{AttributeKind, ImageRef, NONE_LABEL};
use crate::store::AnnotationStore;

/// Attribute counts for one category over all annotated images.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyTable {
    pub category_name: String,
    pub kind: AttributeKind,
    /// Schema order, followed by [`NONE_LABEL`] for image-level categories.
    pub counts: IndexMap<String, u64>,
    pub total_images: u64,
    pub proportions: IndexMap<String, f64>,
}

/// Image-level: one count per image for its chosen attribute (or "none").
/// Object-level: each attribute counted independently, so proportions may
/// sum past 1.
pub fn category_histogram(
    store: &AnnotationStore,
    category_name: &str,
) -> Result<FrequencyTable, AnalysisError> {
    let category = store
        .schema
        .category(category_name)
        .ok_or_else(|| AnalysisError::UnknownCategory(category_name.to_string()))?;
    let mut counts: IndexMap<String, u64> =
        category.attributes.iter().map(|a| (a.clone(), 0)).collect();
    if category.kind == AttributeKind::ImageLevel {
        counts.insert(NONE_LABEL.to_string(), 0);
    }
    let mut total = 0u64;
    for record in store.records_for(category_name) {
        total += 1;
        match category.kind {
            AttributeKind::ImageLevel => *counts.entry(record.label().to_string()).or_default() += 1,
            AttributeKind::ObjectLevel => {
                for attr in record.detections.keys() {
                    *counts.entry(attr.clone()).or_default() += 1;
                }
            }
        }
    }
    if total == 0 {
        return Err(AnalysisError::EmptyCategory(category_name.to_string()));
    }
    let proportions = counts
        .iter()
        .map(|(k, &c)| (k.clone(), c as f64 / total as f64))
        .collect();
    Ok(FrequencyTable {
        category_name: category_name.to_string(),
        kind: category.kind,
        counts,
        total_images: total,
        proportions,
    })
}

/// Row-normalized contingency table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossTab {
    pub category_name: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    /// Images per row; the normalizer of `row_normalized`.
    pub row_totals: Vec<u64>,
    pub row_normalized: Vec<Vec<f64>>,
    /// Row labels dropped because they had no images.
    pub omitted_rows: Vec<String>,
}

impl CrossTab {
    /// Tabulates `(row, columns)` observations; each observation adds one to
    /// its row total and one to every listed column.
    pub(crate) fn tabulate<'a>(
        category_name: &str,
        row_order: &[String],
        col_labels: Vec<String>,
        observations: impl IntoIterator<Item = (&'a str, Vec<&'a str>)>,
    ) -> CrossTab {
        let col_index: HashMap<&str, usize> =
            col_labels.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        let mut per_row: HashMap<&str, (u64, Vec<u64>)> = HashMap::new();
        for (row, cols) in observations {
            let entry = per_row
                .entry(row)
                .or_insert_with(|| (0, vec![0; col_labels.len()]));
            entry.0 += 1;
            for c in cols {
                entry.1[col_index[c]] += 1;
            }
        }
        let mut tab = CrossTab {
            category_name: category_name.to_string(),
            row_labels: Vec::new(),
            col_labels,
            counts: Vec::new(),
            row_totals: Vec::new(),
            row_normalized: Vec::new(),
            omitted_rows: Vec::new(),
        };
        for row in row_order {
            match per_row.remove(row.as_str()) {
                Some((total, counts)) if total > 0 => {
                    tab.row_normalized
                        .push(counts.iter().map(|&c| c as f64 / total as f64).collect());
                    tab.row_labels.push(row.clone());
                    tab.row_totals.push(total);
                    tab.counts.push(counts);
                }
                _ => tab.omitted_rows.push(row.clone()),
            }
        }
        tab
    }

    pub fn cell(&self, row: &str, col: &str) -> Option<f64> {
        let r = self.row_labels.iter().position(|l| l == row)?;
        let c = self.col_labels.iter().position(|l| l == col)?;
        Some(self.row_normalized[r][c])
    }
}

/// Class label × attribute table for one category. Rows are the class
/// labels present in `images` (sorted); classes without annotated images are
/// omitted with a warning.
pub fn crosstab(
    store: &AnnotationStore,
    images: &[ImageRef],
    category_name: &str,
) -> Result<CrossTab, AnalysisError> {
    let category = store
        .schema
        .category(category_name)
        .ok_or_else(|| AnalysisError::UnknownCategory(category_name.to_string()))?;
    let labels: HashMap<&str, Option<&str>> = images
        .iter()
        .map(|i| (i.id.as_str(), i.class_label.as_deref()))
        .collect();

    let mut observations = Vec::new();
    for record in store.records_for(category_name) {
        let class = labels
            .get(record.image_id.as_str())
            .copied()
            .flatten()
            .ok_or_else(|| AnalysisError::MissingClassLabel(record.image_id.clone()))?;
        let cols = match category.kind {
            AttributeKind::ImageLevel => vec![record.label()],
            AttributeKind::ObjectLevel => record.detections.keys().map(String::as_str).collect(),
        };
        observations.push((class, cols));
    }

    let rows: Vec<String> = images
        .iter()
        .filter_map(|i| i.class_label.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut cols = category.attributes.clone();
    if category.kind == AttributeKind::ImageLevel {
        cols.push(NONE_LABEL.to_string());
    }
    let tab = CrossTab::tabulate(category_name, &rows, cols, observations);
    for row in &tab.omitted_rows {
        log::warn!("crosstab {category_name}: class {row} has no annotated images; row omitted");
    }
    Ok(tab)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiffEntry {
    pub attribute: String,
    pub proportion_ref: f64,
    pub proportion_cmp: f64,
    /// `proportion_ref - proportion_cmp`; negative means more frequent in the comparison set.
    pub diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CategoryDiff {
    pub category_name: String,
    pub kind: AttributeKind,
    /// Ordered by descending reference proportion; ties keep schema order.
    pub entries: Vec<DiffEntry>,
}

/// Per-attribute proportion differences between a reference store (e.g. a
/// generator's training data) and a comparison store (e.g. its samples).
pub fn distribution_diff(
    store_ref: &AnnotationStore,
    store_cmp: &AnnotationStore,
) -> Result<Vec<CategoryDiff>, AnalysisError> {
    if !store_ref.schema.same_layout(&store_cmp.schema) {
        return Err(AnalysisError::SchemaMismatch);
    }
    let mut out = Vec::new();
    for category in &store_ref.schema.categories {
        let a = category_histogram(store_ref, &category.name)?;
        let b = category_histogram(store_cmp, &category.name)?;
        let mut entries: Vec<DiffEntry> = a
            .proportions
            .iter()
            .map(|(attr, &pa)| {
                let pb = b.proportions.get(attr).copied().unwrap_or(0.0);
                DiffEntry {
                    attribute: attr.clone(),
                    proportion_ref: pa,
                    proportion_cmp: pb,
                    diff: pa - pb,
                }
            })
            .collect();
        entries.sort_by(|x, y| y.proportion_ref.total_cmp(&x.proportion_ref));
        out.push(CategoryDiff {
            category_name: category.name.clone(),
            kind: category.kind,
            entries,
        });
    }
    Ok(out)
}
