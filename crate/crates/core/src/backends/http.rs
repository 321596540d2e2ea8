use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde_json::Value;

use super::transport::{Request, Transport};
use super::{BackendConfig, BackendError};

/// JSON-over-HTTP transport: `POST {endpoint}/{op}` with the request body,
/// bearer auth, and exponential backoff on transient failures.
pub struct HttpTransport {
    client: Client,
    endpoint: String,
    api_key: Option<String>,
    max_retries: u32,
    backoff: Duration,
}

impl HttpTransport {
    /// Resolves the API key from `config.api_key_env`. An empty variable name
    /// disables authentication; a named but unset variable is an [`BackendError::Auth`].
    pub fn new(config: &BackendConfig) -> Result<Self, BackendError> {
        config.validate()?;
        let api_key = if config.api_key_env.is_empty() {
            None
        } else {
            Some(
                std::env::var(&config.api_key_env).map_err(|_| BackendError::Auth {
                    var: config.api_key_env.clone(),
                })?,
            )
        };
        let client = Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_s))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(HttpTransport {
            client,
            endpoint: config.endpoint_url.trim_end_matches('/').to_string(),
            api_key,
            max_retries: config.max_retries,
            backoff: Duration::from_millis(500),
        })
    }

    /// Base delay before the first retry; doubled on each further attempt.
    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    fn attempt(&self, url: &str, request: &Request) -> Result<Value, (BackendError, bool)> {
        let mut builder = self.client.post(url).json(&request.body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| {
            let transient = e.is_timeout() || e.is_connect() || e.is_request();
            (BackendError::Transport(e.to_string()), transient)
        })?;
        let status = response.status();
        let body = response
            .text()
            .map_err(|e| (BackendError::Transport(e.to_string()), true))?;
        if !status.is_success() {
            let transient = status == StatusCode::TOO_MANY_REQUESTS
                || status == StatusCode::REQUEST_TIMEOUT
                || status.is_server_error();
            return Err((
                BackendError::Http {
                    status: status.as_u16(),
                    body,
                },
                transient,
            ));
        }
        serde_json::from_str(&body)
            .map_err(|e| (BackendError::Protocol(format!("invalid JSON from {url}: {e}")), false))
    }
}

impl Transport for HttpTransport {
    fn call(&self, request: &Request) -> Result<Value, BackendError> {
        let url = format!("{}/{}", self.endpoint, request.op);
        let mut attempt = 0u32;
        loop {
            match self.attempt(&url, request) {
                Ok(value) => return Ok(value),
                Err((err, true)) if attempt < self.max_retries => {
                    let delay = self.backoff.saturating_mul(1 << attempt.min(16));
                    log::warn!("{url}: {err}; retry {} in {delay:?}", attempt + 1);
                    thread::sleep(delay);
                    attempt += 1;
                }
                Err((err, _)) => return Err(err),
            }
        }
    }
}
