use std::collections::HashMap;
use std::fs;
use std::path::Path;

use parking_lot::RwLock;

use crate::frame::fnv1a64;
use crate::model::BlobDigest;

use super::StoreError;

/// Content-addressed byte store keyed by 64-bit FNV-1a.
#[derive(Debug, Default)]
pub struct BlobStore {
    blobs: RwLock<HashMap<BlobDigest, Vec<u8>>>,
}

impl BlobStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn digest(bytes: &[u8]) -> BlobDigest {
        BlobDigest(fnv1a64(bytes))
    }

    pub fn put_blob(&self, bytes: Vec<u8>) -> BlobDigest {
        let d = Self::digest(&bytes);
        self.blobs.write().entry(d).or_insert(bytes);
        d
    }

    pub fn get_blob(&self, digest: BlobDigest) -> Result<Vec<u8>, StoreError> {
        self.blobs.read().get(&digest).cloned().ok_or(StoreError::NotFound(digest))
    }

    pub fn len(&self) -> usize {
        self.blobs.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes each blob to `dir/<digest>.png`.
    pub fn save_dir(&self, dir: &Path) -> Result<(), StoreError> {
        fs::create_dir_all(dir)?;
        for (d, bytes) in self.blobs.read().iter() {
            fs::write(dir.join(format!("{d}.png")), bytes)?;
        }
        Ok(())
    }

    pub fn load_dir(dir: &Path) -> Result<Self, StoreError> {
        let store = Self::new();
        for entry in fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "png") {
                let bytes = fs::read(&path)?;
                let d = store.put_blob(bytes);
                if path.file_stem().and_then(|s| s.to_str()) != Some(d.to_string().as_str()) {
                    return Err(StoreError::Corrupt(format!("{} does not match its digest", path.display())));
                }
            }
        }
        Ok(store)
    }
}
