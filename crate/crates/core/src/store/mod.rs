//! The store abstraction the benchmark driver exercises, plus the
//! embedded reference implementation and test adapters.

use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Batch;
use crate::model::{Triple, TriplePattern};

pub mod adapters;
mod dictionary;
mod disk;
mod index;
mod memory;

pub use adapters::{CrashingStore, SlowStore};
pub use dictionary::{TermDictionary, TermId};
pub use disk::DiskStore;
pub use index::{IdPattern, IndexKind};
pub use memory::MemoryStore;

/// Store failures. Any error returned from [`TripleStore::load_batch`]
/// is fatal for the run: the driver records the run as crashed.
#[derive(Debug, Error)]
pub enum StoreError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("incompatible store directory {path}: {reason}")]
    IncompatibleFormat { path: PathBuf, reason: String },
    #[error("store data corrupt: {0}")]
    Corrupt(String),
    #[error("store crashed: {0}")]
    Crashed(String),
}

impl StoreError {
    pub(crate) fn corrupt(message: impl Into<String>) -> Self {
        StoreError::Corrupt(message.into())
    }
}

/// Counts returned by one batch load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadOutcome {
    pub inserted: u64,
    pub duplicates: u64,
}

/// Read-only snapshot of a store's size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreMetricsSnapshot {
    /// Cardinality of the stored triple set.
    pub triple_count: u64,
    /// Number of interned terms.
    pub dictionary_size: u64,
    /// Recursive byte size of the data directory; 0 for pure-memory
    /// stores.
    pub disk_bytes: u64,
}

/// Interface every benchmarked store implements.
///
/// A store handle is single-writer: `load_batch` and `match_pattern`
/// are called from one control thread, never concurrently. Handles may
/// move between threads.
pub trait TripleStore {
    /// Inserts every triple of `batch` with set semantics. After a
    /// successful return all batch triples are present and
    /// `inserted + duplicates == batch.len()`.
    fn load_batch(&mut self, batch: &Batch) -> Result<LoadOutcome, StoreError>;

    /// Streams the stored triples matching `pattern`'s bound positions.
    fn match_pattern<'a>(
        &'a self,
        pattern: &TriplePattern,
    ) -> Box<dyn Iterator<Item = Result<Triple, StoreError>> + 'a>;

    fn snapshot_metrics(&self) -> Result<StoreMetricsSnapshot, StoreError>;

    /// Makes all loaded data durable (no-op for memory stores). Called
    /// by the driver once a run ends, outside any timed window.
    fn finish(&mut self) -> Result<(), StoreError> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Persistence {
    Memory,
    Disk,
}

/// Configuration for [`open_store`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoreConfig {
    pub persistence: Persistence,
    /// Required when `persistence` is `disk`.
    #[serde(default)]
    pub data_dir: Option<PathBuf>,
    /// Buffered id-triples per index before a sorted run is flushed to
    /// disk. Ignored by memory stores.
    #[serde(default = "default_flush_threshold")]
    pub flush_threshold: u64,
}

pub const DEFAULT_FLUSH_THRESHOLD: u64 = 1_000_000;

fn default_flush_threshold() -> u64 {
    DEFAULT_FLUSH_THRESHOLD
}

impl StoreConfig {
    pub fn memory() -> Self {
        StoreConfig {
            persistence: Persistence::Memory,
            data_dir: None,
            flush_threshold: DEFAULT_FLUSH_THRESHOLD,
        }
    }

    pub fn disk(data_dir: impl Into<PathBuf>, flush_threshold: u64) -> Self {
        StoreConfig {
            persistence: Persistence::Disk,
            data_dir: Some(data_dir.into()),
            flush_threshold,
        }
    }
}

/// Opens an empty (or previously committed) reference store per the
/// configuration.
pub fn open_store(config: &StoreConfig) -> Result<Box<dyn TripleStore>, StoreError> {
    match config.persistence {
        Persistence::Memory => Ok(Box::new(MemoryStore::new())),
        Persistence::Disk => {
            let dir = config.data_dir.as_deref().ok_or_else(|| {
                StoreError::corrupt("disk persistence requires a data directory")
            })?;
            Ok(Box::new(DiskStore::open(dir, config.flush_threshold)?))
        }
    }
}

/// Recursive byte size of a directory tree.
pub(crate) fn dir_size(path: &Path) -> io::Result<u64> {
    let mut total = 0;
    if !path.exists() {
        return Ok(0);
    }
    for entry in std::fs::read_dir(path)? {
        let entry = entry?;
        let meta = entry.metadata()?;
        if meta.is_dir() {
            total += dir_size(&entry.path())?;
        } else {
            total += meta.len();
        }
    }
    Ok(total)
}
