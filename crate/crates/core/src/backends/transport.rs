use std::fmt;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use super::BackendError;

/// Backend operation, doubling as the URL path segment on the wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Chat,
    Itm,
    Detect,
    Embed,
}

impl Op {
    pub fn as_str(self) -> &'static str {
        match self {
            Op::Chat => "chat",
            Op::Itm => "itm",
            Op::Detect => "detect",
            Op::Embed => "embed",
        }
    }

    pub fn parse(s: &str) -> Option<Op> {
        [Op::Chat, Op::Itm, Op::Detect, Op::Embed]
            .into_iter()
            .find(|op| op.as_str() == s)
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A backend call: the JSON body sent on the wire plus `salt`, key material
/// that only participates in cache and fixture keys (e.g. the repetition
/// index of a sampled prompt).
#[derive(Clone, Debug, PartialEq)]
pub struct Request {
    pub op: Op,
    pub body: Value,
    pub salt: Vec<(String, Value)>,
}

impl Request {
    pub fn new(op: Op, body: Value) -> Self {
        Request {
            op,
            body,
            salt: Vec::new(),
        }
    }

    pub fn with_salt(mut self, name: &str, value: impl Into<Value>) -> Self {
        self.salt.push((name.to_string(), value.into()));
        self
    }

    /// Hex SHA-256 of the canonical (sorted-key) JSON of op, body and salt.
    pub fn key(&self) -> String {
        key_of(self.op, &self.body, &self.salt)
    }

    /// Keys from most to least specific, dropping trailing salt entries one at
    /// a time. Fixture lookups fall back along this chain.
    pub fn fallback_keys(&self) -> Vec<String> {
        (0..=self.salt.len())
            .rev()
            .map(|n| key_of(self.op, &self.body, &self.salt[..n]))
            .collect()
    }
}

pub(crate) fn key_document(op: Op, body: &Value, salt: &[(String, Value)]) -> Value {
    let mut doc = Map::new();
    doc.insert("op".into(), Value::from(op.as_str()));
    doc.insert("body".into(), body.clone());
    if !salt.is_empty() {
        let salt: Map<String, Value> = salt.iter().cloned().collect();
        doc.insert("salt".into(), Value::Object(salt));
    }
    Value::Object(doc)
}

fn key_of(op: Op, body: &Value, salt: &[(String, Value)]) -> String {
    // serde_json maps are ordered by key, so this serialization is canonical.
    let canonical = serde_json::to_vec(&key_document(op, body, salt)).expect("json value serializes");
    hex::encode(Sha256::digest(&canonical))
}

/// Moves a request to a backend and returns the raw JSON response.
/// Implementations must be safe to call concurrently.
pub trait Transport: Send + Sync {
    fn call(&self, request: &Request) -> Result<Value, BackendError>;
}
