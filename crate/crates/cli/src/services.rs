//! Turns backend configs into clients.
//!
//! `endpoint_url` selects the implementation:
//! `http://` or `https://` for a live service, `mock:fixtures` to replay a
//! fixture file and `mock:hash-embedding?dim=N` for the deterministic
//! embedding mock. Live and fixture clients sit behind the response cache
//! when `paths.cache_dir` is set.

use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use attrlens_core::backends::{
    maybe_cached, Client, EmbedBackend, FixtureTransport, HashEmbedder,
    HttpTransport, Transport,
};

use crate::config::ProjectConfig;
use crate::error::CliError;

pub struct Services<'a> {
    config: &'a ProjectConfig,
    fixture_path: Option<PathBuf>,
    fixtures: OnceLock<Arc<FixtureTransport>>,
}

impl<'a> Services<'a> {
    /// `mock_fixtures` overrides `paths.mock_fixtures`.
    pub fn new(config: &'a ProjectConfig, mock_fixtures: Option<PathBuf>) -> Self {
        let fixture_path = mock_fixtures.or_else(|| {
            (!config.paths.mock_fixtures.as_os_str().is_empty())
                .then(|| config.resolve(&config.paths.mock_fixtures))
        });
        Services {
            config,
            fixture_path,
            fixtures: OnceLock::new(),
        }
    }

    fn fixture_transport(&self) -> Result<Arc<FixtureTransport>, CliError> {
        if let Some(t) = self.fixtures.get() {
            return Ok(t.clone());
        }
        let path = self.fixture_path.as_ref().ok_or_else(|| {
            CliError::Config("mock:fixtures backend needs --mock-fixtures or paths.mock_fixtures".into())
        })?;
        let t = Arc::new(FixtureTransport::load(path).map_err(|e| CliError::Config(e.to_string()))?);
        Ok(self.fixtures.get_or_init(|| t).clone())
    }

    /// Requests answered by the fixture file so far, if one was loaded.
    pub fn fixture_calls(&self) -> Option<usize> {
        self.fixtures.get().map(|t| t.calls())
    }

    fn transport(&self, role: &str) -> Result<Arc<dyn Transport>, CliError> {
        let cfg = self.config.backend(role);
        let url = cfg.endpoint_url.as_str();
        let inner: Arc<dyn Transport> = if url == "mock:fixtures" {
            self.fixture_transport()?
        } else if url.starts_with("http://") || url.starts_with("https://") {
            Arc::new(HttpTransport::new(cfg)?)
        } else {
            return Err(CliError::Config(format!(
                "backend {role}: unsupported endpoint_url {url:?}"
            )));
        };
        Ok(maybe_cached(inner, self.config.cache_dir().as_deref()))
    }

    /// Client for the chat, itm or detect role.
    pub fn client(&self, role: &str) -> Result<Client, CliError> {
        let model = self.config.backend(role).model_id.clone();
        Ok(Client::new(self.transport(role)?, model))
    }

    pub fn embedder(&self) -> Result<Box<dyn EmbedBackend>, CliError> {
        let cfg = self.config.backend("embed");
        if let Some(query) = cfg.endpoint_url.strip_prefix("mock:hash-embedding") {
            let dim = query
                .strip_prefix("?dim=")
                .map_or(Ok(64), str::parse::<usize>)
                .ok()
                .filter(|&d| d > 0)
                .ok_or_else(|| {
                    CliError::Config(format!("embed: bad endpoint_url {:?}", cfg.endpoint_url))
                })?;
            return Ok(Box::new(HashEmbedder::new(cfg.model_id.clone(), dim)));
        }
        Ok(Box::new(self.client("embed")?))
    }
}

