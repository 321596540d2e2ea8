use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;

use serde_json::Value;

use super::transport::{Request, Transport};
use super::BackendError;

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Persistent response cache in front of another transport: one
/// `<request key>.json` file per entry under `dir`.
pub struct CachedTransport {
    inner: Arc<dyn Transport>,
    dir: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl CachedTransport {
    pub fn new(inner: Arc<dyn Transport>, dir: impl Into<PathBuf>) -> Self {
        CachedTransport {
            inner,
            dir: dir.into(),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::SeqCst)
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn store(&self, path: &Path, value: &Value) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        // Unique temp name per writer; the rename makes last-write-wins atomic.
        let n = TMP_COUNTER.fetch_add(1, Ordering::Relaxed);
        let tmp = self
            .dir
            .join(format!(".{}.{}.{n}.tmp", std::process::id(), path.file_stem().unwrap().to_string_lossy()));
        fs::write(&tmp, serde_json::to_vec(value).expect("json value serializes"))?;
        fs::rename(&tmp, path)
    }
}

impl Transport for CachedTransport {
    fn call(&self, request: &Request) -> Result<Value, BackendError> {
        let path = self.entry_path(&request.key());
        if let Ok(bytes) = fs::read(&path) {
            match serde_json::from_slice(&bytes) {
                Ok(value) => {
                    self.hits.fetch_add(1, Ordering::SeqCst);
                    return Ok(value);
                }
                Err(e) => log::warn!("ignoring corrupt cache entry {}: {e}", path.display()),
            }
        }
        self.misses.fetch_add(1, Ordering::SeqCst);
        let value = self.inner.call(request)?;
        if let Err(e) = self.store(&path, &value) {
            log::warn!("could not write cache entry {}: {e}", path.display());
        }
        Ok(value)
    }
}

#[cfg(test)]
mod tests {
    use super::super::mock::FixtureBuilder;
    use super::super::transport::Op;
    use super::*;
    use serde_json::json;

    #[test]
    fn second_call_served_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let req = Request::new(Op::Itm, json!({"model": "blip", "caption": "a red car"}));
        let mut fx = FixtureBuilder::new();
        fx.push(&req, json!({"score": 0.25}));
        let mock = Arc::new(fx.build());
        let cached = CachedTransport::new(mock.clone(), dir.path());
        let a = cached.call(&req).unwrap();
        let b = cached.call(&req).unwrap();
        assert_eq!(a, b);
        assert_eq!(mock.calls(), 1);
        assert_eq!((cached.hits(), cached.misses()), (1, 1));

        // a fresh cache over an empty mock still answers from disk
        let empty = Arc::new(FixtureBuilder::new().build());
        let warm = CachedTransport::new(empty.clone(), dir.path());
        assert_eq!(warm.call(&req).unwrap(), a);
        assert_eq!(empty.calls(), 0);
    }

    #[test]
    fn errors_are_not_cached() {
        let dir = tempfile::tempdir().unwrap();
        let mock = Arc::new(FixtureBuilder::new().build());
        let cached = CachedTransport::new(mock.clone(), dir.path());
        let req = Request::new(Op::Chat, json!({"prompt": "p"}));
        assert!(cached.call(&req).is_err());
        assert!(cached.call(&req).is_err());
        assert_eq!(mock.calls(), 2);
    }
}
