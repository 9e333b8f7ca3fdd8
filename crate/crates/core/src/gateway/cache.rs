use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Gateway, GatewayError, PromptBundle};

#[derive(Serialize, Deserialize)]
struct CacheEntry {
    model: String,
    response: String,
}

/// Content-addressed response cache in front of another gateway.
///
/// Keys are `sha256(model_name, serialized bundle)`, never record ids, so a
/// rerun over the same prompts is served entirely from disk. Errors are not
/// cached.
pub struct CachedGateway<G> {
    inner: G,
    dir: PathBuf,
    model: String,
    write_lock: Mutex<()>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

pub fn cache_key(model: &str, bundle: &PromptBundle) -> String {
    let mut hasher = Sha256::new();
    hasher.update(model.as_bytes());
    hasher.update([0u8]);
    hasher.update(serde_json::to_vec(bundle).expect("bundle serializes"));
    hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

impl<G: Gateway> CachedGateway<G> {
    pub fn new(inner: G, dir: impl Into<PathBuf>, model: &str) -> Self {
        CachedGateway {
            inner,
            dir: dir.into(),
            model: model.to_string(),
            write_lock: Mutex::new(()),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }

    /// Number of calls forwarded to the wrapped gateway.
    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::SeqCst)
    }

    pub fn inner(&self) -> &G {
        &self.inner
    }

    fn path_for(&self, key: &str) -> PathBuf {
        self.dir.join(&key[..2]).join(format!("{key}.json"))
    }

    fn read(&self, path: &Path) -> Option<String> {
        let raw = fs::read_to_string(path).ok()?;
        let entry: CacheEntry = serde_json::from_str(&raw).ok()?;
        (entry.model == self.model).then_some(entry.response)
    }

    fn write(&self, path: &Path, response: &str) {
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        let entry = CacheEntry {
            model: self.model.clone(),
            response: response.to_string(),
        };
        let Some(parent) = path.parent() else { return };
        if fs::create_dir_all(parent).is_err() {
            return;
        }
        let tmp = path.with_extension("json.tmp");
        let body = serde_json::to_string_pretty(&entry).expect("cache entry serializes");
        if fs::write(&tmp, body).is_ok() {
            let _ = fs::rename(&tmp, path);
        }
    }
}

impl<G: Gateway> Gateway for CachedGateway<G> {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, GatewayError> {
        let key = cache_key(&self.model, bundle);
        let path = self.path_for(&key);
        if let Some(hit) = self.read(&path) {
            self.hits.fetch_add(1, Ordering::SeqCst);
            return Ok(hit);
        }
        self.misses.fetch_add(1, Ordering::SeqCst);
        let response = self.inner.complete(bundle)?;
        self.write(&path, &response);
        Ok(response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::{GatewayErrorKind, PromptKind};

    struct Counting(AtomicUsize, bool);

    impl Gateway for Counting {
        fn complete(&self, bundle: &PromptBundle) -> Result<String, GatewayError> {
            self.0.fetch_add(1, Ordering::SeqCst);
            if self.1 {
                return Err(GatewayError::new(GatewayErrorKind::Transport, "down"));
            }
            Ok(format!("echo {}", bundle.user))
        }
    }

    fn bundle(user: &str) -> PromptBundle {
        PromptBundle {
            kind: PromptKind::Cot,
            system: "s".into(),
            fewshots: vec![],
            user: user.into(),
        }
    }

    #[test]
    fn second_identical_call_is_served_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let gw = CachedGateway::new(Counting(AtomicUsize::new(0), false), dir.path(), "m");
        assert_eq!(gw.complete(&bundle("a")).unwrap(), "echo a");
        assert_eq!(gw.complete(&bundle("a")).unwrap(), "echo a");
        assert_eq!(gw.inner().0.load(Ordering::SeqCst), 1);
        assert_eq!((gw.hits(), gw.misses()), (1, 1));

        let fresh = CachedGateway::new(Counting(AtomicUsize::new(0), true), dir.path(), "m");
        assert_eq!(fresh.complete(&bundle("a")).unwrap(), "echo a");
        assert_eq!(fresh.inner().0.load(Ordering::SeqCst), 0);
    }

    #[test]
    fn model_name_is_part_of_the_key() {
        let b = bundle("a");
        assert_ne!(cache_key("m1", &b), cache_key("m2", &b));
        assert_eq!(cache_key("m1", &b), cache_key("m1", &b.clone()));
    }

    #[test]
    fn errors_are_not_cached() {
        let dir = tempfile::tempdir().unwrap();
        let gw = CachedGateway::new(Counting(AtomicUsize::new(0), true), dir.path(), "m");
        assert!(gw.complete(&bundle("a")).is_err());
        assert!(gw.complete(&bundle("a")).is_err());
        assert_eq!(gw.inner().0.load(Ordering::SeqCst), 2);
    }
}
