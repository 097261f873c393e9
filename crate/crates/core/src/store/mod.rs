//! In-memory persistence: the detection log, crop blobs and the watchlist,
//! with JSON Lines snapshots.

pub mod blobs;
pub mod detections;
pub mod filter;
pub mod watchlist;

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use thiserror::Error;

use crate::model::BlobDigest;

pub use blobs::BlobStore;
pub use detections::DetectionStore;
pub use filter::{DetectionFilter, GeoBox};
pub use watchlist::WatchlistStore;

pub const DETECTIONS_FILE: &str = "detections.jsonl";
pub const WATCHLIST_FILE: &str = "watchlist.jsonl";
pub const BLOBS_DIR: &str = "blobs";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("bad filter: {0}")]
    BadFilter(String),
    #[error("blob {0} not found")]
    NotFound(BlobDigest),
    #[error("watchlist already has this target as entry {0}")]
    DuplicateEntry(u64),
    #[error("no watchlist entry {0}")]
    UnknownEntry(u64),
    #[error("bad value: {0}")]
    BadValue(String),
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// The three stores a deployment shares.
#[derive(Debug, Default)]
pub struct Stores {
    pub detections: DetectionStore,
    pub blobs: BlobStore,
    pub watchlist: WatchlistStore,
}

impl Stores {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn save_dir(&self, dir: &Path) -> Result<(), StoreError> {
        std::fs::create_dir_all(dir)?;
        self.detections.write_jsonl(BufWriter::new(File::create(dir.join(DETECTIONS_FILE))?))?;
        self.watchlist.write_jsonl(BufWriter::new(File::create(dir.join(WATCHLIST_FILE))?))?;
        self.blobs.save_dir(&dir.join(BLOBS_DIR))
    }

    /// Loads whatever snapshot files exist under `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, StoreError> {
        let open = |name: &str| -> Result<Option<BufReader<File>>, StoreError> {
            let p = dir.join(name);
            Ok(if p.exists() { Some(BufReader::new(File::open(p)?)) } else { None })
        };
        let blobs_dir = dir.join(BLOBS_DIR);
        Ok(Self {
            detections: open(DETECTIONS_FILE)?.map(DetectionStore::replay).transpose()?.unwrap_or_default(),
            watchlist: open(WATCHLIST_FILE)?.map(WatchlistStore::replay).transpose()?.unwrap_or_default(),
            blobs: if blobs_dir.is_dir() { BlobStore::load_dir(&blobs_dir)? } else { BlobStore::new() },
        })
    }
}

#[cfg(test)]
mod tests;
