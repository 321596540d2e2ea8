//! Attribute-schema generation with a chat LLM, zero-shot annotation of image
//! corpora with vision-language backends, and dataset-bias statistics over the
//! resulting annotations.
//!
//! The pipeline runs in three stages:
//!
//! 1. [`attrgen`] asks a chat backend for attribute categories, attributes per
//!    category and whether each category is object- or image-level, repeating
//!    every prompt and keeping the most frequent answers.
//! 2. [`annotate`] labels every image: image-level categories by image-text
//!    matching against a base caption, object-level categories by
//!    open-vocabulary detection above a threshold.
//! 3. [`analysis`] turns the [`AnnotationStore`] into histograms, cross-tabs,
//!    distribution differences, AUCs, confusion matrices, and recall /
//!    effective-dimension measurements of the generated schema itself.

pub mod analysis;
pub mod annotate;
pub mod attrgen;
pub mod backends;
pub mod caption;
pub mod model;
pub mod report;
pub mod store;

pub use annotate::{AnnotationOutcome, Annotator, AnnotatorConfig, FailPolicy};
pub use attrgen::{generate_schema, SchemaGenerator};
pub use model::{
    normalize_name, validate_schema, AnnotationRecord, AttributeCategory, AttributeKind,
    AttributeSchema, CaptionTemplate, DetectionBox, DomainSpec, ImageRef, BASE_KEY, NONE_LABEL,
};
pub use store::AnnotationStore;
