//! Hierarchical attribute generation with a chat-completion backend.
//!
//! Categories are sampled first and fixed by frequency; attributes are then
//! sampled per fixed category; finally each category is voted object-level
//! or image-level. Every prompt is issued several times and the most
//! frequent answers are kept.

mod aggregate;
mod parse;
mod prompts;

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

pub use aggregate::{aggregate_top_k, RunSet};
pub use parse::{parse_list_response, parse_yes_no, ParseError, YesNo};
pub use prompts::{build_q1, build_q2, build_q3, CATEGORY_LIST_SUFFIX, EXAMPLE_LIST_SUFFIX};

use crate::backends::{BackendError, ChatBackend, LlmRequest};
use crate::model::{
    AttributeCategory, AttributeKind, AttributeSchema, CaptionTemplate, DomainSpec, BASE_KEY,
    NONE_LABEL,
};

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("chat backend failed on prompt {prompt:?}: {source}")]
    Backend {
        prompt: String,
        #[source]
        source: BackendError,
    },
    #[error("gave up after {attempts} unparseable responses to prompt {prompt:?}: {source}")]
    Parse {
        prompt: String,
        attempts: u32,
        #[source]
        source: ParseError,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorOptions {
    pub temperature: f64,
    /// Consecutive unparseable responses tolerated per sample before failing.
    pub max_parse_retries: u32,
}

impl Default for GeneratorOptions {
    fn default() -> Self {
        GeneratorOptions {
            temperature: LlmRequest::DEFAULT_TEMPERATURE,
            max_parse_retries: 3,
        }
    }
}

/// Drives the category, attribute and kind queries against one chat backend.
pub struct SchemaGenerator<'a> {
    backend: &'a dyn ChatBackend,
    options: GeneratorOptions,
}

impl<'a> SchemaGenerator<'a> {
    pub fn new(backend: &'a dyn ChatBackend) -> Self {
        Self::with_options(backend, GeneratorOptions::default())
    }

    pub fn with_options(backend: &'a dyn ChatBackend, options: GeneratorOptions) -> Self {
        SchemaGenerator { backend, options }
    }

    fn request(&self, prompt: &str, rep: u32, attempt: u32) -> LlmRequest {
        let mut req = LlmRequest::new(prompt, self.backend.model_id()).sample(rep, attempt);
        req.temperature = self.options.temperature;
        req
    }

    fn ask(&self, prompt: &str, rep: u32, attempt: u32) -> Result<String, GenerateError> {
        self.backend
            .chat_complete(&self.request(prompt, rep, attempt))
            .map_err(|source| GenerateError::Backend {
                prompt: prompt.to_string(),
                source,
            })
    }

    /// One parsed list sample, re-issuing the prompt on format failures.
    fn sample_list(&self, prompt: &str, rep: u32) -> Result<Vec<String>, GenerateError> {
        let attempts = self.options.max_parse_retries.max(1);
        let mut last = None;
        for attempt in 0..attempts {
            let text = self.ask(prompt, rep, attempt)?;
            match parse_list_response(&text) {
                Ok(items) => return Ok(items),
                Err(e) => {
                    log::warn!("unparseable response (rep {rep}, attempt {attempt}): {e}");
                    last = Some(e);
                }
            }
        }
        Err(GenerateError::Parse {
            prompt: prompt.to_string(),
            attempts,
            source: last.expect("at least one attempt"),
        })
    }

    fn sample_runs(&self, prompt: &str, reps: u32) -> Result<RunSet, GenerateError> {
        let runs = (0..reps)
            .into_par_iter()
            .map(|rep| self.sample_list(prompt, rep))
            .collect::<Result<Vec<_>, _>>()?;
        RunSet::new(runs).ok_or_else(|| GenerateError::InvalidInput("repetition count is 0".into()))
    }

    /// Majority vote over repeated object/holistic queries. Ambiguous answers
    /// abstain; ties (including no votes) resolve to image-level.
    pub fn classify_kind<S: AsRef<str> + Sync>(
        &self,
        attributes: &[S],
        reps: u32,
    ) -> Result<AttributeKind, GenerateError> {
        let prompt = build_q3(attributes)?;
        let votes = (0..reps)
            .into_par_iter()
            .map(|rep| self.ask(&prompt, rep, 0).map(|t| parse_yes_no(&t)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(kind_from_votes(&votes))
    }

    /// Runs the full three-stage generation for `domain`.
    ///
    /// All categories come back with the identity template; image-level ones
    /// are flagged `needs_review` until a user assigns their template.
    pub fn generate(&self, domain: &DomainSpec) -> Result<AttributeSchema, GenerateError> {
        let problems = domain.violations();
        if !problems.is_empty() {
            return Err(GenerateError::InvalidInput(problems.join("; ")));
        }
        let category_runs = self.sample_runs(&build_q1(domain), domain.reps_categories)?;
        let names = aggregate_top_k(&category_runs, domain.n_categories as usize);

        let categories = names
            .par_iter()
            .map(|name| self.generate_category(domain, name))
            .collect::<Result<Vec<_>, _>>()?;

        let mut provenance = BTreeMap::new();
        provenance.insert("model_id".to_string(), self.backend.model_id().to_string());
        provenance.insert("temperature".to_string(), self.options.temperature.to_string());
        provenance.insert("n_categories".to_string(), domain.n_categories.to_string());
        provenance.insert("m_attributes".to_string(), domain.m_attributes.to_string());
        provenance.insert("reps_categories".to_string(), domain.reps_categories.to_string());
        provenance.insert("reps_attributes".to_string(), domain.reps_attributes.to_string());
        provenance.insert("reps_kind".to_string(), domain.reps_kind.to_string());

        Ok(AttributeSchema {
            domain: domain.clone(),
            categories: categories.into_iter().flatten().collect(),
            provenance,
        })
    }

    fn generate_category(
        &self,
        domain: &DomainSpec,
        name: &str,
    ) -> Result<Option<AttributeCategory>, GenerateError> {
        let runs = self.sample_runs(&build_q2(domain, name)?, domain.reps_attributes)?;
        let runs = runs
            .runs()
            .iter()
            .map(|run| {
                run.iter()
                    .filter(|a| a.as_str() != BASE_KEY && a.as_str() != NONE_LABEL)
                    .cloned()
                    .collect()
            })
            .collect();
        let runs = RunSet::new(runs).expect("non-empty");
        let attributes = aggregate_top_k(&runs, domain.m_attributes as usize);
        if attributes.is_empty() {
            log::warn!("category {name:?} produced no usable attributes; dropped");
            return Ok(None);
        }
        let kind = self.classify_kind(&attributes, domain.reps_kind)?;
        let mut category = AttributeCategory::new(name, attributes, kind, CaptionTemplate::Identity);
        category.needs_review = kind == AttributeKind::ImageLevel;
        Ok(Some(category))
    }
}

/// Convenience wrapper around [`SchemaGenerator::generate`] with default options.
pub fn generate_schema(
    domain: &DomainSpec,
    backend: &dyn ChatBackend,
) -> Result<AttributeSchema, GenerateError> {
    SchemaGenerator::new(backend).generate(domain)
}

pub(crate) fn kind_from_votes(votes: &[YesNo]) -> AttributeKind {
    let yes = votes.iter().filter(|v| **v == YesNo::Yes).count();
    let no = votes.iter().filter(|v| **v == YesNo::No).count();
    if yes > no {
        AttributeKind::ObjectLevel
    } else {
        AttributeKind::ImageLevel
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{Client, FixtureBuilder};
    use std::sync::Arc;

    #[test]
    fn vote_rules() {
        use YesNo::*;
        assert_eq!(kind_from_votes(&[Yes, No, Ambiguous]), AttributeKind::ImageLevel);
        assert_eq!(kind_from_votes(&[Yes, Yes, No]), AttributeKind::ObjectLevel);
        assert_eq!(kind_from_votes(&[Ambiguous, Ambiguous]), AttributeKind::ImageLevel);
        assert_eq!(kind_from_votes(&[Yes, Ambiguous]), AttributeKind::ObjectLevel);
    }

    fn domain() -> DomainSpec {
        DomainSpec::new("a photo of a living room", "living room")
            .with_sizes(2, 2)
            .with_reps(1, 1, 1)
    }

    #[test]
    fn parse_retries_then_succeeds() {
        let d = domain();
        let q1 = build_q1(&d);
        let mut fx = FixtureBuilder::new();
        fx.chat("gpt", &q1, 0.3, Some(0), Some(0), "no list here")
            .chat("gpt", &q1, 0.3, Some(0), Some(1), "['furniture']")
            .chat("gpt", &build_q2(&d, "furniture").unwrap(), 0.3, None, None, "['sofa', 'rug']")
            .chat("gpt", &build_q3(&["sofa", "rug"]).unwrap(), 0.3, None, None, "Yes.");
        let client = Client::new(Arc::new(fx.build()), "gpt");
        let schema = generate_schema(&d, &client).unwrap();
        assert_eq!(schema.categories.len(), 1);
        assert_eq!(schema.categories[0].kind, AttributeKind::ObjectLevel);
        assert!(!schema.categories[0].needs_review);
    }

    #[test]
    fn parse_exhaustion() {
        let d = domain();
        let mut fx = FixtureBuilder::new();
        fx.chat("gpt", &build_q1(&d), 0.3, None, None, "I'd rather not.");
        let client = Client::new(Arc::new(fx.build()), "gpt");
        match generate_schema(&d, &client) {
            Err(GenerateError::Parse { attempts: 3, .. }) => {}
            other => panic!("expected parse exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn backend_error_propagates() {
        let client = Client::new(Arc::new(FixtureBuilder::new().build()), "gpt");
        assert!(matches!(
            generate_schema(&domain(), &client),
            Err(GenerateError::Backend { .. })
        ));
    }
}
