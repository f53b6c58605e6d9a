//! Content-addressed response cache: one JSON file per (model, prompt) digest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// SHA-256 over the model name and the rendered prompt.
pub fn prompt_digest(model_name: &str, prompt: &str) -> String {
    let mut h = Sha256::new();
    h.update(model_name.as_bytes());
    h.update([0u8]);
    h.update(prompt.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub model_name: String,
    pub prompt: String,
    pub text: String,
    #[serde(default)]
    pub truncated: bool,
}

#[derive(Debug)]
pub struct ResponseCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ResponseCache {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, digest: &str) -> PathBuf {
        self.dir.join(&digest[..2]).join(format!("{digest}.json"))
    }

    /// A hit whose stored model or prompt differs from the request is treated
    /// as a miss.
    pub fn get(&self, digest: &str, model_name: &str, prompt: &str) -> Option<CacheEntry> {
        let bytes = fs::read(self.path_for(digest)).ok()?;
        let entry: CacheEntry = serde_json::from_slice(&bytes).ok()?;
        (entry.model_name == model_name && entry.prompt == prompt).then_some(entry)
    }

    pub fn put(&self, digest: &str, entry: &CacheEntry) -> std::io::Result<()> {
        let path = self.path_for(digest);
        let parent = path.parent().expect("cache path has a parent");
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        fs::create_dir_all(parent)?;
        let mut tmp = tempfile::NamedTempFile::new_in(parent)?;
        tmp.write_all(&serde_json::to_vec_pretty(entry)?)?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_depends_on_model_and_prompt() {
        let a = prompt_digest("gpt-4", "hello");
        assert_eq!(a.len(), 64);
        assert_eq!(a, prompt_digest("gpt-4", "hello"));
        assert_ne!(a, prompt_digest("gpt-3.5-turbo", "hello"));
        assert_ne!(prompt_digest("ab", "c"), prompt_digest("a", "bc"));
    }

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::open(dir.path()).unwrap();
        let d = prompt_digest("m", "p");
        assert!(cache.get(&d, "m", "p").is_none());
        let e = CacheEntry {
            model_name: "m".into(),
            prompt: "p".into(),
            text: "1. Q?".into(),
            truncated: false,
        };
        cache.put(&d, &e).unwrap();
        assert_eq!(cache.get(&d, "m", "p"), Some(e));
        assert!(cache.get(&d, "m", "other").is_none());
    }
}
