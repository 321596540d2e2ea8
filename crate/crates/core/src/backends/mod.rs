//! Clients for the four model services (chat completion, image-text matching,
//! open-vocabulary detection, text embedding).
//!
//! Typed clients build minimal JSON requests and hand them to a [`Transport`]:
//! [`HttpTransport`] for live endpoints, [`FixtureTransport`] for replaying
//! recorded responses, and [`CachedTransport`] to put a disk cache in front of
//! either. Embedding also has two pure in-process mocks, [`HashEmbedder`] and
//! [`DictionaryEmbedder`].
//!
//! Wire contract (all `POST`, JSON bodies):
//!
//! | path      | request                                  | response |
//! |-----------|------------------------------------------|----------|
//! | `/chat`   | `{model, prompt, temperature}`           | `{text}` |
//! | `/itm`    | `{model, image_b64, caption}`            | `{score}` |
//! | `/detect` | `{model, image_b64, queries:[..]}`       | `{detections:[{query, boxes:[{x_min,y_min,x_max,y_max,score}]}]}` |
//! | `/embed`  | `{model, text}`                          | `{values:[..]}` |

mod cache;
mod embed;
mod http;
mod mock;
mod transport;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub use cache::CachedTransport;
pub use embed::{DictionaryEmbedder, HashEmbedder};
pub use http::HttpTransport;
pub use mock::{FixtureBuilder, FixtureTransport};
pub use transport::{Op, Request, Transport};

use crate::model::DetectionBox;

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("API key environment variable {var} is not set")]
    Auth { var: String },
    #[error("backend returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("unreadable image: {0}")]
    Decode(String),
    #[error("unexpected backend response: {0}")]
    Protocol(String),
    #[error("no fixture for {op} request {key}")]
    MissingFixture { op: Op, key: String },
    #[error("fixture error: {0}")]
    Fixture(String),
    #[error("invalid request: {0}")]
    InvalidInput(String),
    #[error("invalid backend config: {0}")]
    Config(String),
}

fn default_timeout() -> f64 {
    60.0
}
fn default_retries() -> u32 {
    3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub endpoint_url: String,
    pub model_id: String,
    /// Name of the environment variable holding the API key; empty for none.
    #[serde(default)]
    pub api_key_env: String,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
}

impl BackendConfig {
    pub fn new(endpoint_url: impl Into<String>, model_id: impl Into<String>) -> Self {
        BackendConfig {
            endpoint_url: endpoint_url.into(),
            model_id: model_id.into(),
            api_key_env: String::new(),
            timeout_s: default_timeout(),
            max_retries: default_retries(),
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if !(self.timeout_s > 0.0 && self.timeout_s.is_finite()) {
            return Err(BackendError::Config(format!(
                "timeout_s must be positive, got {}",
                self.timeout_s
            )));
        }
        Ok(())
    }
}

/// Boxes returned for one free-text detection query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub query: String,
    pub boxes: Vec<DetectionBox>,
}

impl Detection {
    pub fn max_score(&self) -> f64 {
        self.boxes.iter().map(|b| b.score).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Self {
        EmbeddingVector { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Zero vectors are legal but have no direction; cosine treats them as 0.
    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// A chat-completion prompt. `rep` and `attempt` identify which sample of a
/// repeated prompt this is; they key caches and fixtures but are not sent.
#[derive(Clone, Debug, PartialEq)]
pub struct LlmRequest {
    pub prompt: String,
    pub temperature: f64,
    pub model_id: String,
    pub rep: u32,
    pub attempt: u32,
}

impl LlmRequest {
    pub const DEFAULT_TEMPERATURE: f64 = 0.3;

    pub fn new(prompt: impl Into<String>, model_id: impl Into<String>) -> Self {
        LlmRequest {
            prompt: prompt.into(),
            temperature: Self::DEFAULT_TEMPERATURE,
            model_id: model_id.into(),
            rep: 0,
            attempt: 0,
        }
    }

    pub fn sample(mut self, rep: u32, attempt: u32) -> Self {
        self.rep = rep;
        self.attempt = attempt;
        self
    }
}

pub trait ChatBackend: Send + Sync {
    fn model_id(&self) -> &str;
    fn chat_complete(&self, request: &LlmRequest) -> Result<String, BackendError>;
}

pub trait ItmBackend: Send + Sync {
    fn model_id(&self) -> &str;
    /// Matching score of `caption` for the image; higher is a better match.
    fn itm_score(&self, image: &[u8], caption: &str) -> Result<f64, BackendError>;
}

pub trait DetectBackend: Send + Sync {
    fn model_id(&self) -> &str;
    /// One [`Detection`] per query, in query order.
    fn detect(&self, image: &[u8], queries: &[String]) -> Result<Vec<Detection>, BackendError>;
}

pub trait EmbedBackend: Send + Sync {
    fn model_id(&self) -> &str;
    fn embed_text(&self, text: &str) -> Result<EmbeddingVector, BackendError>;
}

pub(crate) fn chat_body(model: &str, prompt: &str, temperature: f64) -> Value {
    json!({ "model": model, "prompt": prompt, "temperature": temperature })
}

pub(crate) fn itm_body(model: &str, image: &[u8], caption: &str) -> Value {
    json!({ "model": model, "image_b64": mock::encode_image(image), "caption": caption })
}

pub(crate) fn detect_body(model: &str, image: &[u8], queries: &[String]) -> Value {
    json!({ "model": model, "image_b64": mock::encode_image(image), "queries": queries })
}

pub(crate) fn embed_body(model: &str, text: &str) -> Value {
    json!({ "model": model, "text": text })
}

fn field<'a>(value: &'a Value, name: &str, op: Op) -> Result<&'a Value, BackendError> {
    value
        .get(name)
        .ok_or_else(|| BackendError::Protocol(format!("{op} response lacks `{name}`")))
}

/// Typed client over any transport; implements all four backend traits so a
/// single fixture transport can stand in for every service.
#[derive(Clone)]
pub struct Client {
    transport: Arc<dyn Transport>,
    model_id: String,
}

impl Client {
    pub fn new(transport: Arc<dyn Transport>, model_id: impl Into<String>) -> Self {
        Client {
            transport,
            model_id: model_id.into(),
        }
    }

    /// HTTP client for `config`, optionally behind a disk cache.
    pub fn http(config: &BackendConfig, cache_dir: Option<&std::path::Path>) -> Result<Self, BackendError> {
        let transport: Arc<dyn Transport> = Arc::new(HttpTransport::new(config)?);
        Ok(Self::new(maybe_cached(transport, cache_dir), config.model_id.clone()))
    }

    pub fn transport(&self) -> &Arc<dyn Transport> {
        &self.transport
    }
}

/// Wraps `transport` in a [`CachedTransport`] when a cache directory is given.
pub fn maybe_cached(transport: Arc<dyn Transport>, cache_dir: Option<&std::path::Path>) -> Arc<dyn Transport> {
    match cache_dir {
        Some(dir) => Arc::new(CachedTransport::new(transport, dir)),
        None => transport,
    }
}

impl ChatBackend for Client {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn chat_complete(&self, request: &LlmRequest) -> Result<String, BackendError> {
        if request.prompt.trim().is_empty() {
            return Err(BackendError::InvalidInput("empty prompt".into()));
        }
        if request.temperature.is_nan() || request.temperature < 0.0 {
            return Err(BackendError::InvalidInput("temperature must be >= 0".into()));
        }
        let model = if request.model_id.is_empty() {
            &self.model_id
        } else {
            &request.model_id
        };
        let req = Request::new(Op::Chat, chat_body(model, &request.prompt, request.temperature))
            .with_salt("rep", request.rep)
            .with_salt("attempt", request.attempt);
        let response = self.transport.call(&req)?;
        field(&response, "text", Op::Chat)?
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| BackendError::Protocol("chat `text` is not a string".into()))
    }
}

impl ItmBackend for Client {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn itm_score(&self, image: &[u8], caption: &str) -> Result<f64, BackendError> {
        if image.is_empty() {
            return Err(BackendError::Decode("empty image".into()));
        }
        if caption.trim().is_empty() {
            return Err(BackendError::InvalidInput("empty caption".into()));
        }
        let req = Request::new(Op::Itm, itm_body(&self.model_id, image, caption));
        let response = self.transport.call(&req)?;
        field(&response, "score", Op::Itm)?
            .as_f64()
            .filter(|s| s.is_finite())
            .ok_or_else(|| BackendError::Protocol("itm `score` is not a finite number".into()))
    }
}

impl DetectBackend for Client {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn detect(&self, image: &[u8], queries: &[String]) -> Result<Vec<Detection>, BackendError> {
        if image.is_empty() {
            return Err(BackendError::Decode("empty image".into()));
        }
        if queries.is_empty() {
            return Err(BackendError::InvalidInput("detect needs at least one query".into()));
        }
        let req = Request::new(Op::Detect, detect_body(&self.model_id, image, queries));
        let response = self.transport.call(&req)?;
        let detections: Vec<Detection> =
            serde_json::from_value(field(&response, "detections", Op::Detect)?.clone())
                .map_err(|e| BackendError::Protocol(format!("detect response: {e}")))?;
        if detections.len() != queries.len()
            || detections.iter().zip(queries).any(|(d, q)| &d.query != q)
        {
            return Err(BackendError::Protocol(
                "detections do not correspond one-to-one with queries".into(),
            ));
        }
        if let Some(b) = detections.iter().flat_map(|d| &d.boxes).find(|b| !b.is_valid()) {
            return Err(BackendError::Protocol(format!("invalid detection box {b:?}")));
        }
        Ok(detections)
    }
}

impl EmbedBackend for Client {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn embed_text(&self, text: &str) -> Result<EmbeddingVector, BackendError> {
        if text.is_empty() {
            return Err(BackendError::InvalidInput("empty text".into()));
        }
        let req = Request::new(Op::Embed, embed_body(&self.model_id, text));
        let response = self.transport.call(&req)?;
        let values: Vec<f64> = serde_json::from_value(field(&response, "values", Op::Embed)?.clone())
            .map_err(|e| BackendError::Protocol(format!("embed response: {e}")))?;
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(BackendError::Protocol("embedding must be non-empty and finite".into()));
        }
        Ok(EmbeddingVector::new(values))
    }
}
