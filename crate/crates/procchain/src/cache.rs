//! On-disk caches: gamma twist histograms, Kato term lists and kernel
//! checkpoints.

use crate::error::{AppError, AppResult};
use procchain_core::chains::{TwistHistogram, DEFAULT_MAX_ORDER, KERNEL_REVISION};
use procchain_core::kato::{format_terms, parse_terms, reduce_to_kato_terms, KatoTerm};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Short hash identifying the code that produced cached or emitted data.
pub fn code_version() -> String {
    let mut h = Sha256::new();
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    h.update(b"\0");
    h.update(KERNEL_REVISION.as_bytes());
    h.update(b"\0");
    h.update(DEFAULT_MAX_ORDER.to_le_bytes());
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaKey {
    pub d: usize,
    pub g: u32,
    pub mu_over_u: f64,
    pub k: usize,
    pub nu: usize,
}

impl GammaKey {
    /// File stem; the chemical potential enters through its exact bits.
    pub fn id(&self) -> String {
        format!("d{}-g{}-mu{:016x}-k{}-nu{}", self.d, self.g, self.mu_over_u.to_bits(), self.k, self.nu)
    }

    /// Key as reported in output provenance.
    pub fn label(&self, version: &str) -> String {
        format!("{}@{version}", self.id())
    }
}

/// One cached kernel result. The histogram holds every twist value:
/// `gamma(theta) = sum_delta bins[delta + nu] exp(i theta delta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaEntry {
    pub key: GammaKey,
    pub code_version: String,
    /// Untwisted value `[re, im]`.
    pub gamma: [f64; 2],
    pub bins: Vec<f64>,
    pub diagrams: u64,
    pub animals: u64,
    pub kato_terms: Option<usize>,
    pub wall_seconds: f64,
}

impl GammaEntry {
    pub fn histogram(&self) -> AppResult<TwistHistogram> {
        Ok(TwistHistogram::from_raw(self.key.nu, &self.bins)?)
    }
}

/// Partial sums of an interrupted kernel run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub code_version: String,
    pub keys: Vec<GammaKey>,
    pub total_units: usize,
    pub next_unit: usize,
    pub diagrams: u64,
    pub elapsed_seconds: f64,
    /// `[state][bin] = (sum, compensation)`.
    pub parts: Vec<Vec<(f64, f64)>>,
}

pub struct Cache {
    root: PathBuf,
    version: String,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> AppResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes).map_err(|e| AppError::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| AppError::io(path, e))
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Cache { root: root.into(), version: code_version() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    fn gamma_path(&self, key: &GammaKey) -> PathBuf {
        self.root.join("gamma").join(format!("{}.json", key.id()))
    }

    /// Cached entry for `key`, or `None` (with a warning) when the entry is
    /// missing, unreadable or stems from another code version.
    pub fn load_gamma(&self, key: &GammaKey) -> Option<GammaEntry> {
        let path = self.gamma_path(key);
        let text = std::fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<GammaEntry>(&text) {
            Ok(e) if e.code_version != self.version => {
                eprintln!(
                    "warning: {} was written by code version {}, current is {}; recomputing",
                    path.display(),
                    e.code_version,
                    self.version
                );
                None
            }
            Ok(e) if e.key != *key || e.bins.len() != 2 * key.nu + 1 => {
                eprintln!("warning: {} does not match its key; recomputing", path.display());
                None
            }
            Ok(e) => Some(e),
            Err(err) => {
                eprintln!("warning: unreadable cache entry {}: {err}; recomputing", path.display());
                None
            }
        }
    }

    pub fn store_gamma(&self, entry: &GammaEntry) -> AppResult<()> {
        let path = self.gamma_path(&entry.key);
        let text =
            serde_json::to_string_pretty(entry).map_err(|e| AppError::Format { path: path.clone(), message: e.to_string() })?;
        write_atomic(&path, text.as_bytes())
    }

    fn checkpoint_path(&self, keys: &[GammaKey]) -> PathBuf {
        let mut h = Sha256::new();
        for k in keys {
            h.update(k.id().as_bytes());
            h.update(b"\n");
        }
        let tag: String = h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect();
        self.root.join("checkpoints").join(format!("{tag}.json"))
    }

    pub fn load_checkpoint(&self, keys: &[GammaKey], total_units: usize) -> Option<Checkpoint> {
        let path = self.checkpoint_path(keys);
        let text = std::fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<Checkpoint>(&text) {
            Ok(c) if c.code_version == self.version && c.keys == keys && c.total_units == total_units => {
                eprintln!("resuming from checkpoint {} at unit {}/{}", path.display(), c.next_unit, total_units);
                Some(c)
            }
            _ => {
                eprintln!("warning: ignoring stale checkpoint {}", path.display());
                None
            }
        }
    }

    pub fn store_checkpoint(&self, cp: &Checkpoint) -> AppResult<()> {
        let path = self.checkpoint_path(&cp.keys);
        let text = serde_json::to_string(cp).map_err(|e| AppError::Format { path: path.clone(), message: e.to_string() })?;
        write_atomic(&path, text.as_bytes())
    }

    pub fn clear_checkpoint(&self, keys: &[GammaKey]) {
        let _ = std::fs::remove_file(self.checkpoint_path(keys));
    }

    /// Reduced Kato terms of order `n`, read from or written to the cache.
    pub fn kato_terms(&self, n: usize) -> AppResult<Vec<KatoTerm>> {
        let path = self.root.join("kato").join(format!("order-{n}.txt"));
        if let Ok(text) = std::fs::read_to_string(&path) {
            match parse_terms(&text) {
                Ok((order, terms)) if order == n => return Ok(terms),
                _ => eprintln!("warning: unreadable Kato term file {}; recomputing", path.display()),
            }
        }
        let terms = reduce_to_kato_terms(n)?;
        write_atomic(&path, format_terms(n, &terms).as_bytes())?;
        Ok(terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key() -> GammaKey {
        GammaKey { d: 2, g: 1, mu_over_u: 0.373, k: 1, nu: 1 }
    }

    #[test]
    fn gamma_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let e = GammaEntry {
            key: key(),
            code_version: cache.version().to_string(),
            gamma: [-0.1 / 3.0, 0.0],
            bins: vec![1.0 / 3.0, -2.0 / 7.0, 1e-17 + 0.1],
            diagrams: 3,
            animals: 1,
            kato_terms: Some(2),
            wall_seconds: 0.5,
        };
        cache.store_gamma(&e).unwrap();
        assert_eq!(cache.load_gamma(&key()), Some(e));
    }

    #[test]
    fn version_mismatch_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let e = GammaEntry {
            key: key(),
            code_version: "stale".into(),
            gamma: [0.0; 2],
            bins: vec![0.0; 3],
            diagrams: 0,
            animals: 0,
            kato_terms: None,
            wall_seconds: 0.0,
        };
        cache.store_gamma(&e).unwrap();
        assert!(cache.load_gamma(&key()).is_none());
    }

    #[test]
    fn kato_terms_cached() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        assert_eq!(cache.kato_terms(5).unwrap().len(), 10);
        assert!(dir.path().join("kato/order-5.txt").exists());
        assert_eq!(cache.kato_terms(5).unwrap().len(), 10);
    }
}
