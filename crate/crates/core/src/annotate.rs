//! Zero-shot annotation of a corpus against a schema.
//!
//! Image-level categories are a multiclass decision: every attribute caption
//! and the base caption are scored by the ITM backend, and the best attribute
//! is kept only if it strictly beats the base caption. Object-level categories
//! are multilabel: each attribute is a detection query and is present when
//! its best box scores strictly above `alpha`.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backends::{BackendError, DetectBackend, Detection, ItmBackend};
use crate::caption::{base_caption, render_caption};
use crate::model::{
    validate_schema, AnnotationRecord, AttributeCategory, AttributeKind, AttributeSchema,
    DomainSpec, ImageRef, BASE_KEY,
};
use crate::store::{AnnotationStore, StoreError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailPolicy {
    /// Log the failure, drop the record and continue.
    SkipRecord,
    /// Stop at the first backend failure.
    AbortRun,
}

fn default_alpha() -> f64 {
    0.3
}
fn default_parallelism() -> usize {
    4
}
fn default_policy() -> FailPolicy {
    FailPolicy::SkipRecord
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorConfig {
    /// Detection threshold; strictly between 0 and 1.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_policy")]
    pub fail_policy: FailPolicy,
}

impl Default for AnnotatorConfig {
    fn default() -> Self {
        AnnotatorConfig {
            alpha: default_alpha(),
            parallelism: default_parallelism(),
            fail_policy: default_policy(),
        }
    }
}

impl AnnotatorConfig {
    pub fn validate(&self) -> Result<(), AnnotateError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(AnnotateError::InvalidConfig(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.parallelism == 0 {
            return Err(AnnotateError::InvalidConfig("parallelism must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("image {image_id}, category {category}: {source}")]
    Backend {
        image_id: String,
        category: String,
        #[source]
        source: BackendError,
    },
    #[error("schema is invalid: {}", .0.join("; "))]
    InvalidSchema(Vec<String>),
    #[error("{0}")]
    InvalidConfig(String),
    #[error("category {0} has kind {1}, which this annotator does not handle")]
    WrongKind(String, AttributeKind),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Index of the winning attribute among `scores` (schema order), or `None`
/// when no attribute strictly beats `base`. Ties between attributes go to
/// the earliest; a tie with the base caption yields `None`.
pub fn choose_attribute(scores: &[f64], base: f64) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    best.filter(|&b| scores[b] > base)
}

/// Scores every attribute caption and the base caption for one image.
pub fn annotate_image_level(
    image: &ImageRef,
    bytes: &[u8],
    category: &AttributeCategory,
    domain: &DomainSpec,
    itm: &dyn ItmBackend,
) -> Result<AnnotationRecord, AnnotateError> {
    if category.kind != AttributeKind::ImageLevel {
        return Err(AnnotateError::WrongKind(category.name.clone(), category.kind));
    }
    let fail = |source| AnnotateError::Backend {
        image_id: image.id.clone(),
        category: category.name.clone(),
        source,
    };
    let scores = category
        .attributes
        .iter()
        .map(|attr| {
            let caption = render_caption(category.template, &domain.noun, attr, &category.name);
            itm.itm_score(bytes, &caption.text)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(fail)?;
    let base = itm.itm_score(bytes, &base_caption(domain)).map_err(fail)?;

    let chosen = choose_attribute(&scores, base).map(|i| category.attributes[i].clone());
    let mut attribute_scores: BTreeMap<String, f64> =
        category.attributes.iter().cloned().zip(scores).collect();
    attribute_scores.insert(BASE_KEY.to_string(), base);
    Ok(AnnotationRecord {
        image_id: image.id.clone(),
        category_name: category.name.clone(),
        kind: AttributeKind::ImageLevel,
        chosen_attribute: chosen,
        attribute_scores,
        detections: BTreeMap::new(),
    })
}

/// Builds an object-level record from per-attribute detections: max box
/// score per attribute, boxes strictly above `alpha` kept for present ones.
pub fn object_record(
    image_id: &str,
    category: &AttributeCategory,
    detections: &[Detection],
    alpha: f64,
) -> AnnotationRecord {
    let mut attribute_scores = BTreeMap::new();
    let mut kept = BTreeMap::new();
    for (attr, det) in category.attributes.iter().zip(detections) {
        let max = det.max_score();
        attribute_scores.insert(attr.clone(), max);
        if max > alpha {
            let boxes = det.boxes.iter().filter(|b| b.score > alpha).copied().collect();
            kept.insert(attr.clone(), boxes);
        }
    }
    AnnotationRecord {
        image_id: image_id.to_string(),
        category_name: category.name.clone(),
        kind: AttributeKind::ObjectLevel,
        chosen_attribute: None,
        attribute_scores,
        detections: kept,
    }
}

/// Queries the detector with the raw attribute strings.
pub fn annotate_object_level(
    image: &ImageRef,
    bytes: &[u8],
    category: &AttributeCategory,
    detect: &dyn DetectBackend,
    alpha: f64,
) -> Result<AnnotationRecord, AnnotateError> {
    if category.kind != AttributeKind::ObjectLevel {
        return Err(AnnotateError::WrongKind(category.name.clone(), category.kind));
    }
    let detections = detect
        .detect(bytes, &category.attributes)
        .map_err(|source| AnnotateError::Backend {
            image_id: image.id.clone(),
            category: category.name.clone(),
            source,
        })?;
    Ok(object_record(&image.id, category, &detections, alpha))
}

/// Supplies raw image bytes for manifest entries.
pub trait ImageSource: Send + Sync {
    fn load(&self, image: &ImageRef) -> Result<Vec<u8>, BackendError>;
}

/// Reads images from disk (paths relative to `base_dir`) or over http(s).
pub struct FsImageSource {
    base_dir: PathBuf,
}

impl FsImageSource {
    pub fn new(base_dir: impl Into<PathBuf>) -> Self {
        FsImageSource {
            base_dir: base_dir.into(),
        }
    }
}

impl ImageSource for FsImageSource {
    fn load(&self, image: &ImageRef) -> Result<Vec<u8>, BackendError> {
        let uri = image.uri.as_str();
        let bytes = if uri.starts_with("http://") || uri.starts_with("https://") {
            reqwest::blocking::get(uri)
                .and_then(|r| r.error_for_status())
                .and_then(|r| r.bytes())
                .map(|b| b.to_vec())
                .map_err(|e| BackendError::Transport(format!("{uri}: {e}")))?
        } else {
            let path = uri.strip_prefix("file://").unwrap_or(uri);
            let path = self.base_dir.join(Path::new(path));
            std::fs::read(&path).map_err(|e| BackendError::Decode(format!("{}: {e}", path.display())))?
        };
        if bytes.is_empty() {
            return Err(BackendError::Decode(format!("{uri}: empty image")));
        }
        Ok(bytes)
    }
}

/// In-memory image bytes keyed by image id.
#[derive(Default)]
pub struct MemoryImageSource(pub HashMap<String, Vec<u8>>);

impl ImageSource for MemoryImageSource {
    fn load(&self, image: &ImageRef) -> Result<Vec<u8>, BackendError> {
        self.0
            .get(&image.id)
            .cloned()
            .ok_or_else(|| BackendError::Decode(format!("no bytes for image {}", image.id)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkippedRecord {
    pub image_id: String,
    pub category: String,
    pub reason: String,
}

#[derive(Debug)]
pub struct AnnotationOutcome {
    pub store: AnnotationStore,
    pub computed: usize,
    pub reused: usize,
    pub skipped: Vec<SkippedRecord>,
}

/// Called with every freshly computed record, e.g. to append it to disk.
pub type RecordSink<'a> = &'a (dyn Fn(&AnnotationRecord) -> Result<(), StoreError> + Sync);

pub struct Annotator<'a> {
    pub itm: &'a dyn ItmBackend,
    pub detect: &'a dyn DetectBackend,
    pub images: &'a dyn ImageSource,
    pub config: AnnotatorConfig,
}

/// True when records of `existing` remain valid for `schema` at `alpha`.
pub fn store_matches(existing: &AnnotationStore, schema: &AttributeSchema, alpha: f64) -> bool {
    let strip = |c: &AttributeCategory| AttributeCategory {
        needs_review: false,
        ..c.clone()
    };
    existing.alpha == alpha
        && existing.schema.domain == schema.domain
        && existing.schema.categories.iter().map(strip).eq(schema.categories.iter().map(strip))
}

impl Annotator<'_> {
    fn annotate_one(
        &self,
        image: &ImageRef,
        bytes: &[u8],
        category: &AttributeCategory,
        domain: &DomainSpec,
    ) -> Result<AnnotationRecord, AnnotateError> {
        match category.kind {
            AttributeKind::ImageLevel => annotate_image_level(image, bytes, category, domain, self.itm),
            AttributeKind::ObjectLevel => {
                annotate_object_level(image, bytes, category, self.detect, self.config.alpha)
            }
        }
    }

    /// Annotates every (image, category) pair missing from `existing`.
    ///
    /// `existing` is reused only when its schema and alpha match; otherwise
    /// annotation starts from an empty store. The result does not depend on
    /// the parallelism degree or on completion order.
    pub fn annotate_corpus(
        &self,
        images: &[ImageRef],
        schema: &AttributeSchema,
        existing: Option<AnnotationStore>,
        sink: Option<RecordSink<'_>>,
    ) -> Result<AnnotationOutcome, AnnotateError> {
        self.config.validate()?;
        let problems = validate_schema(schema);
        if !problems.is_empty() {
            return Err(AnnotateError::InvalidSchema(problems));
        }
        if images.is_empty() {
            return Err(AnnotateError::EmptyCorpus);
        }

        let mut store = match existing {
            Some(prev) if store_matches(&prev, schema, self.config.alpha) => {
                let mut s = prev;
                s.schema = schema.clone();
                s
            }
            Some(_) => {
                log::warn!("existing store was built with a different schema or alpha; starting over");
                AnnotationStore::new(schema.clone(), self.config.alpha)
            }
            None => AnnotationStore::new(schema.clone(), self.config.alpha),
        };
        let reused = images
            .iter()
            .flat_map(|img| schema.categories.iter().map(move |c| (img, c)))
            .filter(|(img, c)| store.contains(&img.id, &c.name))
            .count();

        let pending: Vec<(&ImageRef, Vec<&AttributeCategory>)> = images
            .iter()
            .map(|img| {
                let cats = schema
                    .categories
                    .iter()
                    .filter(|c| !store.contains(&img.id, &c.name))
                    .collect::<Vec<_>>();
                (img, cats)
            })
            .filter(|(_, cats)| !cats.is_empty())
            .collect();

        let abort = AtomicBool::new(false);
        let sink_error: Mutex<Option<StoreError>> = Mutex::new(None);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.parallelism)
            .build()
            .map_err(|e| AnnotateError::InvalidConfig(e.to_string()))?;

        let results: Vec<Vec<Result<AnnotationRecord, AnnotateError>>> = pool.install(|| {
            pending
                .par_iter()
                .map(|(image, cats)| {
                    if abort.load(Ordering::SeqCst) {
                        return Vec::new();
                    }
                    let bytes = match self.images.load(image) {
                        Ok(b) => b,
                        Err(source) => {
                            if self.config.fail_policy == FailPolicy::AbortRun {
                                abort.store(true, Ordering::SeqCst);
                            }
                            let reason = source.to_string();
                            return cats
                                .iter()
                                .map(|c| {
                                    Err(AnnotateError::Backend {
                                        image_id: image.id.clone(),
                                        category: c.name.clone(),
                                        source: BackendError::Decode(reason.clone()),
                                    })
                                })
                                .collect();
                        }
                    };
                    let mut out = Vec::with_capacity(cats.len());
                    for cat in cats {
                        if abort.load(Ordering::SeqCst) {
                            break;
                        }
                        let result = self.annotate_one(image, &bytes, cat, &schema.domain);
                        match &result {
                            Ok(record) => {
                                if let Some(sink) = sink {
                                    if let Err(e) = sink(record) {
                                        abort.store(true, Ordering::SeqCst);
                                        sink_error.lock().unwrap().get_or_insert(e);
                                    }
                                }
                            }
                            Err(_) if self.config.fail_policy == FailPolicy::AbortRun => {
                                abort.store(true, Ordering::SeqCst);
                            }
                            Err(_) => {}
                        }
                        out.push(result);
                    }
                    out
                })
                .collect()
        });

        if let Some(e) = sink_error.into_inner().unwrap() {
            return Err(e.into());
        }
        let mut computed = 0;
        let mut skipped = Vec::new();
        for result in results.into_iter().flatten() {
            match result {
                Ok(record) => {
                    store.insert(record)?;
                    computed += 1;
                }
                Err(e) if self.config.fail_policy == FailPolicy::AbortRun => return Err(e),
                Err(AnnotateError::Backend {
                    image_id,
                    category,
                    source,
                }) => {
                    log::warn!("skipping image {image_id}, category {category}: {source}");
                    skipped.push(SkippedRecord {
                        image_id,
                        category,
                        reason: source.to_string(),
                    });
                }
                Err(e) => return Err(e),
            }
        }
        Ok(AnnotationOutcome {
            store,
            computed,
            reused,
            skipped,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{Client, FixtureBuilder};
    use crate::model::{CaptionTemplate, DetectionBox};
    use std::sync::Arc;

    #[test]
    fn choose_rules() {
        assert_eq!(choose_attribute(&[0.9, 0.2], 0.5), Some(0));
        assert_eq!(choose_attribute(&[0.4, 0.3], 0.5), None);
        assert_eq!(choose_attribute(&[0.5, 0.5], 0.1), Some(0));
        assert_eq!(choose_attribute(&[0.5, 0.5], 0.5), None);
        assert_eq!(choose_attribute(&[], 0.0), None);
    }

    fn det(query: &str, scores: &[f64]) -> Detection {
        Detection {
            query: query.into(),
            boxes: scores
                .iter()
                .map(|&score| DetectionBox {
                    x_min: 1.0,
                    y_min: 1.0,
                    x_max: 5.0,
                    y_max: 5.0,
                    score,
                })
                .collect(),
        }
    }

    fn furniture() -> AttributeCategory {
        AttributeCategory::new(
            "furniture",
            vec!["sofa".into(), "rug".into(), "lamp".into()],
            AttributeKind::ObjectLevel,
            CaptionTemplate::Identity,
        )
    }

    #[test]
    fn strict_alpha_threshold() {
        let rec = object_record(
            "img",
            &furniture(),
            &[det("sofa", &[0.31, 0.1]), det("rug", &[0.30]), det("lamp", &[])],
            0.3,
        );
        assert_eq!(rec.detections.keys().collect::<Vec<_>>(), ["sofa"]);
        assert_eq!(rec.detections["sofa"].len(), 1);
        assert_eq!(rec.attribute_scores["rug"], 0.30);
        assert_eq!(rec.attribute_scores["lamp"], 0.0);
        assert!(rec.violations(0.3).is_empty());
    }

    #[test]
    fn image_level_through_backend() {
        let domain = DomainSpec::new("a photo of a car", "car");
        let cat = AttributeCategory::new(
            "color",
            vec!["red".into(), "blue".into()],
            AttributeKind::ImageLevel,
            CaptionTemplate::Is,
        );
        let mut fx = FixtureBuilder::new();
        fx.itm("blip", b"px", "a red car", 0.9)
            .itm("blip", b"px", "a blue car", 0.2)
            .itm("blip", b"px", "a photo of a car", 0.5);
        let itm = Client::new(Arc::new(fx.build()), "blip");
        let image = ImageRef {
            id: "i1".into(),
            uri: "i1.png".into(),
            class_label: None,
        };
        let rec = annotate_image_level(&image, b"px", &cat, &domain, &itm).unwrap();
        assert_eq!(rec.chosen_attribute.as_deref(), Some("red"));
        assert_eq!(rec.attribute_scores[BASE_KEY], 0.5);
        assert!(matches!(
            annotate_object_level(&image, b"px", &cat, &itm, 0.3),
            Err(AnnotateError::WrongKind(..))
        ));
    }

    #[test]
    fn config_bounds() {
        let mut c = AnnotatorConfig::default();
        assert!(c.validate().is_ok());
        c.alpha = 1.0;
        assert!(c.validate().is_err());
        c.alpha = 0.5;
        c.parallelism = 0;
        assert!(c.validate().is_err());
    }

    proptest::proptest! {
        #[test]
        fn chosen_attribute_beats_base_and_every_other(
            scores in proptest::collection::vec(0u8..5, 1..6),
            base in 0u8..5,
        ) {
            let scores: Vec<f64> = scores.into_iter().map(f64::from).collect();
            let base = f64::from(base);
            match choose_attribute(&scores, base) {
                Some(i) => {
                    proptest::prop_assert!(scores[i] > base);
                    proptest::prop_assert!(scores[..i].iter().all(|&s| s < scores[i]));
                    proptest::prop_assert!(scores[i..].iter().all(|&s| s <= scores[i]));
                }
                None => proptest::prop_assert!(scores.iter().all(|&s| s <= base)),
            }
        }
    }
}
