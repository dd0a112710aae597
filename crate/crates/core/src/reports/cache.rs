//! Content-addressed cache for computed spectra.
//!
//! Keys are SHA-256 digests of the JSON-encoded inputs plus the cache schema,
//! so bumping `CACHE_SCHEMA` invalidates every entry. Values are stored as raw
//! f64 bit patterns to round-trip exactly.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const CACHE_ENV: &str = "HLT_CACHE_DIR";
const CACHE_SCHEMA: u32 = 1;

#[derive(Debug)]
pub struct SpectrumCache {
    dir: PathBuf,
    hits: AtomicU64,
    misses: AtomicU64,
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(SpectrumCache {
            dir,
            hits: AtomicU64::new(0),
            misses: AtomicU64::new(0),
        })
    }

    /// `$HLT_CACHE_DIR` if set, else `<out>/cache`.
    pub fn from_env(out: &Path) -> Result<Self> {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::new(PathBuf::from(d)),
            _ => Self::new(out.join("cache")),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key<K: Serialize>(inputs: &K) -> Result<String> {
        let mut h = Sha256::new();
        h.update(CACHE_SCHEMA.to_le_bytes());
        h.update(serde_json::to_vec(inputs)?);
        Ok(hex::encode(h.finalize()))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    fn read(&self, key: &str) -> Option<Vec<f64>> {
        let bytes = fs::read(self.path(key)).ok()?;
        let bits: Vec<u64> = serde_json::from_slice(&bytes).ok()?;
        Some(bits.into_iter().map(f64::from_bits).collect())
    }

    /// Cached values for `inputs`, computing and storing them on a miss.
    /// A corrupt entry counts as a miss and is overwritten.
    pub fn get_or_compute<K, F>(&self, inputs: &K, compute: F) -> Result<Vec<f64>>
    where
        K: Serialize,
        F: FnOnce() -> Result<Vec<f64>>,
    {
        let key = Self::key(inputs)?;
        if let Some(v) = self.read(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(v);
        }
        let ticket = self.misses.fetch_add(1, Ordering::Relaxed);
        let values = compute()?;
        let bits: Vec<u64> = values.iter().map(|v| v.to_bits()).collect();
        // write-then-rename so concurrent readers never see a partial file
        let tmp = self.dir.join(format!("{key}.{}-{ticket}.tmp", std::process::id()));
        fs::write(&tmp, serde_json::to_vec(&bits)?)?;
        fs::rename(&tmp, self.path(&key))?;
        Ok(values)
    }

    pub fn stats(&self) -> (u64, u64) {
        (self.hits.load(Ordering::Relaxed), self.misses.load(Ordering::Relaxed))
    }
}
