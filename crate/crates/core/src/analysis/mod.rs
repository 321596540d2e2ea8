//! Statistics over generated schemas and annotation stores.
//!
//! All functions are pure over their inputs and iterate in a fixed order, so
//! results are bit-identical across runs and thread counts.

mod auc;
mod confusion;
mod dimension;
mod eigen;
mod frequency;
mod recall;
mod sweep;

use thiserror::Error;

pub use auc::{auc, dataset_auc, AttributeAuc, AucTable, GroundTruth};
pub use confusion::{
    confusion_matrix, consensus_labels, machine_labels, ConfusionMatrix, HumanAnnotation,
    NO_CONSENSUS, UNKNOWN_LABEL,
};
pub use dimension::{effective_dimension, effective_dimension_of, EffectiveDimension};
pub use eigen::symmetric_eigenvalues;
pub use frequency::{
    category_histogram, crosstab, distribution_diff, CategoryDiff, CrossTab, DiffEntry,
    FrequencyTable,
};
pub use recall::{cosine, recall, recall_from_vectors, RecallConfig};
pub use sweep::{run_sweep, SweepOutcome, SweepPoint};

use crate::backends::BackendError;
use crate::model::AttributeKind;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("unknown category: {0}")]
    UnknownCategory(String),
    #[error("category {0} has no annotation records")]
    EmptyCategory(String),
    #[error("image {0} has no class label")]
    MissingClassLabel(String),
    #[error("stores were built from different schemas")]
    SchemaMismatch,
    #[error("length mismatch: {0} scores vs {1} labels")]
    LengthMismatch(usize, usize),
    #[error("ground truth is missing {} (image, attribute) pairs, first: {:?}", .0.len(), .0.first())]
    Coverage(Vec<(String, String)>),
    #[error("no images carry both a human and a machine label")]
    EmptyIntersection,
    #[error("embedding dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("category {0} is {1}; this statistic needs the other kind")]
    WrongKind(String, AttributeKind),
    #[error(transparent)]
    Backend(#[from] BackendError),
}
