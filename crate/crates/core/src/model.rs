//! Shared domain types: the domain description, generated attribute schemas,
//! corpus image references and per-image annotation records.
//!
//! Everything here is a plain value type; file I/O lives in [`crate::store`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Score-map key holding the base-caption ITM score of an image-level record.
pub const BASE_KEY: &str = "__base__";

/// Column label used for images that received no image-level attribute.
pub const NONE_LABEL: &str = "none";

/// Normalizes an LLM-produced name: lowercase, trimmed, internal whitespace
/// collapsed to single spaces and trailing periods removed.
pub fn normalize_name(raw: &str) -> String {
    let collapsed = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    let lowered = collapsed.to_lowercase();
    lowered.trim_end_matches('.').trim_end().to_string()
}

/// Trims and collapses whitespace without changing case.
pub(crate) fn collapse_whitespace(raw: &str) -> String {
    raw.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn default_n() -> u32 {
    10
}
fn default_m() -> u32 {
    5
}
fn default_reps() -> u32 {
    5
}
fn default_reps_kind() -> u32 {
    3
}

/// The user's description of the image domain plus generation parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainSpec {
    /// Phrase inserted into the category/attribute queries, e.g. "a photo of a bird".
    pub caption: String,
    /// Head noun used by caption templates, e.g. "bird".
    pub noun: String,
    #[serde(default = "default_n")]
    pub n_categories: u32,
    #[serde(default = "default_m")]
    pub m_attributes: u32,
    #[serde(default = "default_reps")]
    pub reps_categories: u32,
    #[serde(default = "default_reps")]
    pub reps_attributes: u32,
    #[serde(default = "default_reps_kind")]
    pub reps_kind: u32,
}

impl DomainSpec {
    /// Builds a domain with the default sizes (10 categories, 5 attributes)
    /// and repetition counts (5, 5, 3).
    pub fn new(caption: impl Into<String>, noun: impl Into<String>) -> Self {
        DomainSpec {
            caption: caption.into(),
            noun: noun.into(),
            n_categories: default_n(),
            m_attributes: default_m(),
            reps_categories: default_reps(),
            reps_attributes: default_reps(),
            reps_kind: default_reps_kind(),
        }
    }

    pub fn with_sizes(mut self, n_categories: u32, m_attributes: u32) -> Self {
        self.n_categories = n_categories;
        self.m_attributes = m_attributes;
        self
    }

    pub fn with_reps(mut self, categories: u32, attributes: u32, kind: u32) -> Self {
        self.reps_categories = categories;
        self.reps_attributes = attributes;
        self.reps_kind = kind;
        self
    }

    /// Returns the invariant violations of this domain, empty when valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.caption.trim().is_empty() {
            out.push("domain caption must be non-empty".to_string());
        }
        if self.noun.trim().is_empty() {
            out.push("domain noun must be non-empty".to_string());
        }
        for (field, value) in [
            ("n_categories", self.n_categories),
            ("m_attributes", self.m_attributes),
            ("reps_categories", self.reps_categories),
            ("reps_attributes", self.reps_attributes),
            ("reps_kind", self.reps_kind),
        ] {
            if value == 0 {
                out.push(format!("domain {field} must be at least 1"));
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.violations().is_empty()
    }
}

/// Which vision backend annotates a category.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeKind {
    /// Holistic property, annotated by image-text matching.
    ImageLevel,
    /// Localizable object or part, annotated by open-vocabulary detection.
    ObjectLevel,
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttributeKind::ImageLevel => "image_level",
            AttributeKind::ObjectLevel => "object_level",
        })
    }
}

/// Noun-attribute relationship phrase used to turn an attribute into a caption.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptionTemplate {
    Is,
    Has,
    With,
    In,
    From,
    Identity,
}

impl CaptionTemplate {
    pub const ALL: [CaptionTemplate; 6] = [
        CaptionTemplate::Is,
        CaptionTemplate::Has,
        CaptionTemplate::With,
        CaptionTemplate::In,
        CaptionTemplate::From,
        CaptionTemplate::Identity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaptionTemplate::Is => "is",
            CaptionTemplate::Has => "has",
            CaptionTemplate::With => "with",
            CaptionTemplate::In => "in",
            CaptionTemplate::From => "from",
            CaptionTemplate::Identity => "identity",
        }
    }
}

impl fmt::Display for CaptionTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CaptionTemplate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase();
        if key == "-" {
            return Ok(CaptionTemplate::Identity);
        }
        CaptionTemplate::ALL
            .into_iter()
            .find(|t| t.as_str() == key)
            .ok_or_else(|| format!("unknown caption template: {s}"))
    }
}

/// One generated axis of visual variation and its attribute values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeCategory {
    pub name: String,
    pub attributes: Vec<String>,
    pub kind: AttributeKind,
    pub template: CaptionTemplate,
    /// Set on freshly generated image-level categories until a template is assigned.
    #[serde(default)]
    pub needs_review: bool,
}

impl AttributeCategory {
    pub fn new(
        name: impl Into<String>,
        attributes: Vec<String>,
        kind: AttributeKind,
        template: CaptionTemplate,
    ) -> Self {
        AttributeCategory {
            name: name.into(),
            attributes,
            kind,
            template,
            needs_review: false,
        }
    }
}

/// Generated categories for a domain together with free-form provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    pub domain: DomainSpec,
    pub categories: Vec<AttributeCategory>,
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
}

impl AttributeSchema {
    pub fn category(&self, name: &str) -> Option<&AttributeCategory> {
        self.categories.iter().find(|c| c.name == name)
    }

    pub fn category_mut(&mut self, name: &str) -> Option<&mut AttributeCategory> {
        self.categories.iter_mut().find(|c| c.name == name)
    }

    /// True when the two schemas annotate the same categories, attributes and kinds.
    /// Templates, review flags and provenance are not compared.
    pub fn same_layout(&self, other: &AttributeSchema) -> bool {
        self.categories.len() == other.categories.len()
            && self
                .categories
                .iter()
                .zip(&other.categories)
                .all(|(a, b)| a.name == b.name && a.kind == b.kind && a.attributes == b.attributes)
    }

    /// Image-level categories still waiting for a template assignment.
    pub fn pending_review(&self) -> Vec<&str> {
        self.categories
            .iter()
            .filter(|c| c.kind == AttributeKind::ImageLevel && c.needs_review)
            .map(|c| c.name.as_str())
            .collect()
    }
}

/// Checks every schema invariant and returns one description per violation.
pub fn validate_schema(schema: &AttributeSchema) -> Vec<String> {
    let mut out = schema.domain.violations();
    let mut seen = BTreeSet::new();

    if schema.categories.len() > schema.domain.n_categories as usize {
        out.push(format!(
            "schema has {} categories but n_categories is {}",
            schema.categories.len(),
            schema.domain.n_categories
        ));
    }

    for cat in &schema.categories {
        let key = normalize_name(&cat.name);
        if key.is_empty() {
            out.push("category name must be non-empty".to_string());
        } else if !seen.insert(key.clone()) {
            out.push(format!("duplicate category name: {key}"));
        }
        if cat.attributes.is_empty() {
            out.push(format!("category {}: attributes must be non-empty", cat.name));
        }
        if cat.attributes.len() > schema.domain.m_attributes as usize {
            out.push(format!(
                "category {}: {} attributes exceed m_attributes {}",
                cat.name,
                cat.attributes.len(),
                schema.domain.m_attributes
            ));
        }
        let mut attrs = BTreeSet::new();
        for attr in &cat.attributes {
            if attr.trim().is_empty() {
                out.push(format!("category {}: empty attribute", cat.name));
            } else if attr == BASE_KEY || attr == NONE_LABEL {
                out.push(format!("category {}: reserved attribute name: {attr}", cat.name));
            } else if !attrs.insert(attr.as_str()) {
                out.push(format!("category {}: duplicate attribute: {attr}", cat.name));
            }
        }
        if cat.kind == AttributeKind::ObjectLevel && cat.template != CaptionTemplate::Identity {
            out.push("object-level category must use identity template".to_string());
        }
    }
    out
}

/// An image in the corpus manifest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageRef {
    pub id: String,
    /// Filesystem path (relative to the manifest) or http(s) URL.
    pub uri: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_label: Option<String>,
}

/// An axis-aligned detection box in pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub score: f64,
}

impl DetectionBox {
    pub fn is_valid(&self) -> bool {
        self.x_min < self.x_max && self.y_min < self.y_max && (0.0..=1.0).contains(&self.score)
    }
}

/// Result of annotating one image against one category.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub image_id: String,
    pub category_name: String,
    pub kind: AttributeKind,
    /// Image-level winner; `None` means no attribute beat the base caption.
    pub chosen_attribute: Option<String>,
    /// Image-level: raw ITM scores plus [`BASE_KEY`]. Object-level: max box score per attribute.
    pub attribute_scores: BTreeMap<String, f64>,
    /// Object-level only: boxes above threshold for each present attribute.
    pub detections: BTreeMap<String, Vec<DetectionBox>>,
}

impl AnnotationRecord {
    /// Attributes labeled present: the chosen one for image-level records,
    /// the detected ones for object-level records.
    pub fn present_attributes(&self) -> Vec<&str> {
        match self.kind {
            AttributeKind::ImageLevel => self.chosen_attribute.iter().map(|s| s.as_str()).collect(),
            AttributeKind::ObjectLevel => self.detections.keys().map(|s| s.as_str()).collect(),
        }
    }

    /// The record's label for single-choice statistics: the chosen attribute or [`NONE_LABEL`].
    pub fn label(&self) -> &str {
        self.chosen_attribute.as_deref().unwrap_or(NONE_LABEL)
    }

    /// Invariant violations of this record under threshold `alpha`.
    pub fn violations(&self, alpha: f64) -> Vec<String> {
        let mut out = Vec::new();
        match self.kind {
            AttributeKind::ImageLevel => {
                if !self.detections.is_empty() {
                    out.push("image-level record carries detections".to_string());
                }
                if let Some(chosen) = &self.chosen_attribute {
                    let (Some(&win), Some(&base)) =
                        (self.attribute_scores.get(chosen), self.attribute_scores.get(BASE_KEY))
                    else {
                        out.push(format!("chosen attribute {chosen} or base score missing"));
                        return out;
                    };
                    if win <= base {
                        out.push(format!("chosen attribute {chosen} does not beat the base caption"));
                    }
                    let beaten = self
                        .attribute_scores
                        .iter()
                        .any(|(k, &v)| k != BASE_KEY && k != chosen && v > win);
                    if beaten {
                        out.push(format!("chosen attribute {chosen} is not the argmax"));
                    }
                }
            }
            AttributeKind::ObjectLevel => {
                if self.chosen_attribute.is_some() {
                    out.push("object-level record carries a chosen attribute".to_string());
                }
                for (attr, &score) in &self.attribute_scores {
                    if (score > alpha) != self.detections.contains_key(attr) {
                        out.push(format!("attribute {attr}: presence disagrees with threshold"));
                    }
                }
            }
        }
        out
    }
}
