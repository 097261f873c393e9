use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use parking_lot::RwLock;

use crate::model::{Target, WatchlistEntry};

use super::StoreError;

#[derive(Debug)]
struct Inner {
    entries: BTreeMap<u64, WatchlistEntry>,
    next_id: u64,
}

impl Default for Inner {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
            next_id: 1,
        }
    }
}

#[derive(Debug, Default)]
pub struct WatchlistStore {
    inner: RwLock<Inner>,
}

impl WatchlistStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&self, target: Target, label: impl Into<String>, created_at_ms: u64) -> Result<u64, StoreError> {
        let mut inner = self.inner.write();
        if let Some(e) = inner.entries.values().find(|e| e.target == target) {
            return Err(StoreError::DuplicateEntry(e.entry_id));
        }
        let entry_id = inner.next_id;
        inner.next_id += 1;
        inner.entries.insert(
            entry_id,
            WatchlistEntry {
                entry_id,
                target,
                label: label.into(),
                created_at_ms,
            },
        );
        Ok(entry_id)
    }

    /// Adds from loosely typed input, e.g. an API body.
    pub fn add_json(&self, kind: &str, value: &serde_json::Value, label: &str, created_at_ms: u64) -> Result<u64, StoreError> {
        let target = Target::from_json(kind, value).map_err(|e| StoreError::BadValue(e.to_string()))?;
        self.add(target, label, created_at_ms)
    }

    pub fn remove(&self, entry_id: u64) -> Result<WatchlistEntry, StoreError> {
        self.inner.write().entries.remove(&entry_id).ok_or(StoreError::UnknownEntry(entry_id))
    }

    pub fn get(&self, entry_id: u64) -> Result<WatchlistEntry, StoreError> {
        self.inner.read().entries.get(&entry_id).cloned().ok_or(StoreError::UnknownEntry(entry_id))
    }

    pub fn list(&self) -> Vec<WatchlistEntry> {
        self.inner.read().entries.values().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.inner.read().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), StoreError> {
        for e in self.inner.read().entries.values() {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn replay<R: BufRead>(r: R) -> Result<Self, StoreError> {
        let mut inner = Inner::default();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let e: WatchlistEntry = serde_json::from_str(&line)?;
            if e.entry_id < inner.next_id || inner.entries.values().any(|o| o.target == e.target) {
                return Err(StoreError::Corrupt(format!("entry {} out of order or duplicated", e.entry_id)));
            }
            inner.next_id = e.entry_id + 1;
            inner.entries.insert(e.entry_id, e);
        }
        Ok(Self {
            inner: RwLock::new(inner),
        })
    }
}
