//! Fixture-replaying transport and a builder for fixture files.
//!
//! A fixture file is JSONL; each line maps one request key to its response:
//!
//! ```text
//! {"key":"<sha256 hex>","op":"chat","response":{"text":"['a', 'b']"}}
//! {"request":{"op":"embed","body":{"model":"m","text":"red"}},"response":{"values":[1.0,0.0]}}
//! ```
//!
//! Lines may carry either the precomputed `key` or the `request` it is derived
//! from. Lookups try the full request key first, then progressively drop salt
//! entries, so a fixture without `rep`/`attempt` salt answers every sample.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use base64::Engine;
use serde::Serialize;
use serde_json::{json, Value};

use super::transport::{key_document, Op, Request, Transport};
use super::{BackendError, Detection};

#[derive(Default)]
pub struct FixtureTransport {
    responses: HashMap<String, Value>,
    calls: AtomicUsize,
}

impl FixtureTransport {
    pub fn from_jsonl(text: &str) -> Result<Self, BackendError> {
        let mut responses = HashMap::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: String| BackendError::Fixture(format!("line {}: {msg}", idx + 1));
            let doc: Value = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            let response = doc
                .get("response")
                .cloned()
                .ok_or_else(|| bad("missing response".into()))?;
            let key = match (doc.get("key"), doc.get("request")) {
                (Some(Value::String(k)), _) => k.clone(),
                (_, Some(req)) => request_from_doc(req).map_err(bad)?.key(),
                _ => return Err(bad("need either key or request".into())),
            };
            responses.insert(key, response);
        }
        Ok(FixtureTransport {
            responses,
            calls: AtomicUsize::new(0),
        })
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = fs::read_to_string(path)
            .map_err(|e| BackendError::Fixture(format!("{}: {e}", path.display())))?;
        Self::from_jsonl(&text)
    }

    /// Number of `call`s served or refused so far.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn len(&self) -> usize {
        self.responses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.responses.is_empty()
    }
}

fn request_from_doc(doc: &Value) -> Result<Request, String> {
    let op = doc
        .get("op")
        .and_then(Value::as_str)
        .and_then(Op::parse)
        .ok_or("request.op must be one of chat, itm, detect, embed")?;
    let body = doc.get("body").cloned().ok_or("request.body missing")?;
    let mut request = Request::new(op, body);
    if let Some(Value::Object(salt)) = doc.get("salt") {
        for (k, v) in salt {
            request = request.with_salt(k, v.clone());
        }
    }
    Ok(request)
}

impl Transport for FixtureTransport {
    fn call(&self, request: &Request) -> Result<Value, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        request
            .fallback_keys()
            .iter()
            .find_map(|k| self.responses.get(k))
            .cloned()
            .ok_or_else(|| BackendError::MissingFixture {
                op: request.op,
                key: request.key(),
            })
    }
}

/// Accumulates fixture lines; used by tests and to hand-author mock projects.
#[derive(Default)]
pub struct FixtureBuilder {
    lines: Vec<String>,
}

#[derive(Serialize)]
struct FixtureLine<'a> {
    key: String,
    op: &'a str,
    response: Value,
}

impl FixtureBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, request: &Request, response: Value) -> &mut Self {
        let line = FixtureLine {
            key: request.key(),
            op: request.op.as_str(),
            response,
        };
        self.lines.push(serde_json::to_string(&line).expect("fixture line serializes"));
        self
    }

    /// Adds a line in readable `request` form instead of a bare key.
    pub fn push_request(&mut self, request: &Request, response: Value) -> &mut Self {
        let mut doc = key_document(request.op, &request.body, &request.salt);
        doc["op"] = Value::from(request.op.as_str());
        self.lines
            .push(json!({"request": doc, "response": response}).to_string());
        self
    }

    /// Response for a chat prompt. `rep`/`attempt` of `None` answer any sample.
    pub fn chat(
        &mut self,
        model: &str,
        prompt: &str,
        temperature: f64,
        rep: Option<u32>,
        attempt: Option<u32>,
        text: &str,
    ) -> &mut Self {
        let mut req = Request::new(Op::Chat, super::chat_body(model, prompt, temperature));
        if let Some(rep) = rep {
            req = req.with_salt("rep", rep);
            if let Some(attempt) = attempt {
                req = req.with_salt("attempt", attempt);
            }
        }
        self.push(&req, json!({ "text": text }))
    }

    pub fn itm(&mut self, model: &str, image: &[u8], caption: &str, score: f64) -> &mut Self {
        let req = Request::new(Op::Itm, super::itm_body(model, image, caption));
        self.push(&req, json!({ "score": score }))
    }

    pub fn detect(
        &mut self,
        model: &str,
        image: &[u8],
        queries: &[String],
        detections: &[Detection],
    ) -> &mut Self {
        let req = Request::new(Op::Detect, super::detect_body(model, image, queries));
        self.push(&req, json!({ "detections": detections }))
    }

    pub fn embed(&mut self, model: &str, text: &str, values: &[f64]) -> &mut Self {
        let req = Request::new(Op::Embed, super::embed_body(model, text));
        self.push(&req, json!({ "values": values }))
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = self.lines.join("\n");
        if !out.is_empty() {
            out.push('\n');
        }
        out
    }

    pub fn build(&self) -> FixtureTransport {
        FixtureTransport::from_jsonl(&self.to_jsonl()).expect("builder emits valid fixtures")
    }
}

pub(crate) fn encode_image(image: &[u8]) -> String {
    base64::engine::general_purpose::STANDARD.encode(image)
}
