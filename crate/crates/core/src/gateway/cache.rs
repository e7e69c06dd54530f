use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::CompletionRequest;
use crate::error::{Error, Result};

/// SHA-256 over (backend, model, temperature, prompt).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CacheKey(String);

impl CacheKey {
    pub fn of(request: &CompletionRequest) -> Self {
        let mut h = Sha256::new();
        for field in [request.backend.as_bytes(), request.model.as_bytes()] {
            h.update((field.len() as u64).to_le_bytes());
            h.update(field);
        }
        h.update(request.temperature.to_bits().to_le_bytes());
        h.update((request.prompt.len() as u64).to_le_bytes());
        h.update(request.prompt.as_bytes());
        CacheKey(hex::encode(h.finalize()))
    }

    pub fn hex(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for CacheKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// One file per key, named by the hex digest, holding the raw completion.
#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(key.hex())
    }

    pub fn get(&self, key: &CacheKey) -> Result<Option<String>> {
        let path = self.path(key);
        match fs::read_to_string(&path) {
            Ok(text) => Ok(Some(text)),
            Err(e) if e.kind() == ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    /// Writes through a temp file and rename, so readers never see a
    /// partial entry. Concurrent writers of one key: last rename wins.
    pub fn put(&self, key: &CacheKey, text: &str) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let tmp = self.dir.join(format!(
            ".{}.{}.{}.tmp",
            key.hex(),
            std::process::id(),
            TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
        ));
        fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
        let dest = self.path(key);
        fs::rename(&tmp, &dest).map_err(|e| Error::io(dest, e))
    }

    /// Digests currently stored, sorted.
    pub fn keys(&self) -> Result<Vec<CacheKey>> {
        let entries = match fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(Error::io(&self.dir, e)),
        };
        let mut keys = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&self.dir, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if name.len() == 64 && name.bytes().all(|b| b.is_ascii_hexdigit()) {
                keys.push(CacheKey(name));
            }
        }
        keys.sort();
        Ok(keys)
    }

    /// Removes every entry; returns how many were removed.
    pub fn clear(&self) -> Result<usize> {
        let keys = self.keys()?;
        for k in &keys {
            let p = self.path(k);
            fs::remove_file(&p).map_err(|e| Error::io(p, e))?;
        }
        Ok(keys.len())
    }
}
