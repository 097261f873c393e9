use std::collections::HashSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use parking_lot::{Condvar, Mutex};

use crate::geo::GpsFix;
use crate::model::MatchEvent;

/// Subscribers further behind than this are cut off.
pub const MAX_SUBSCRIBER_LAG: usize = 10_000;

type Listener = Box<dyn Fn() + Send + Sync>;

#[derive(Default)]
struct Inner {
    events: Vec<MatchEvent>,
    pairs: HashSet<(u64, u64)>,
}

/// The single ordered sequence of match events. Each (entry, detection)
/// pair is published at most once.
#[derive(Default)]
pub struct MatchHub {
    inner: Mutex<Inner>,
    appended: Condvar,
    listeners: Mutex<Vec<Listener>>,
}

impl std::fmt::Debug for MatchHub {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatchHub").field("len", &self.len()).finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("subscriber fell {lag} events behind")]
pub struct Lagged {
    pub lag: usize,
}

impl MatchHub {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a callback run after every publication that appended events.
    pub fn on_publish(&self, f: impl Fn() + Send + Sync + 'static) {
        self.listeners.lock().push(Box::new(f));
    }

    /// Appends one event per new (entry, detection) pair and returns them.
    pub fn publish(&self, detection_id: u64, entries: impl IntoIterator<Item = u64>, fix: GpsFix, now_ms: u64) -> Vec<MatchEvent> {
        let mut out = Vec::new();
        {
            let mut inner = self.inner.lock();
            for entry_id in entries {
                if !inner.pairs.insert((entry_id, detection_id)) {
                    continue;
                }
                let ev = MatchEvent {
                    match_id: inner.events.len() as u64 + 1,
                    entry_id,
                    detection_id,
                    fix,
                    matched_at_ms: now_ms,
                };
                inner.events.push(ev.clone());
                out.push(ev);
            }
        }
        if !out.is_empty() {
            self.appended.notify_all();
            for l in self.listeners.lock().iter() {
                l();
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.inner.lock().events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, entry_id: u64, detection_id: u64) -> bool {
        self.inner.lock().pairs.contains(&(entry_id, detection_id))
    }

    /// Events after the first `since`.
    pub fn since(&self, since: usize) -> Vec<MatchEvent> {
        let inner = self.inner.lock();
        inner.events.get(since..).map(<[_]>::to_vec).unwrap_or_default()
    }

    /// At most `limit` events after `since`.
    pub fn page(&self, since: usize, limit: usize) -> Vec<MatchEvent> {
        let inner = self.inner.lock();
        let end = inner.events.len().min(since.saturating_add(limit));
        inner.events.get(since..end).map(<[_]>::to_vec).unwrap_or_default()
    }

    pub fn all(&self) -> Vec<MatchEvent> {
        self.since(0)
    }

    /// Blocks until more than `since` events exist or `timeout` passes.
    pub fn wait_since(&self, since: usize, timeout: Duration) -> Vec<MatchEvent> {
        self.wait_beyond(since, timeout);
        self.since(since)
    }

    fn wait_beyond(&self, since: usize, timeout: Duration) {
        let deadline = Instant::now() + timeout;
        let mut inner = self.inner.lock();
        while inner.events.len() <= since {
            if self.appended.wait_until(&mut inner, deadline).timed_out() {
                break;
            }
        }
    }

    pub fn subscribe(self: &Arc<Self>, since: usize) -> Subscription {
        Subscription {
            hub: Arc::clone(self),
            cursor: since,
            live: false,
        }
    }
}

/// A reader's position in the match sequence. History is replayed in
/// pages; once the reader has caught up it is cut off if it ever falls more
/// than [`MAX_SUBSCRIBER_LAG`] events behind.
#[derive(Debug)]
pub struct Subscription {
    hub: Arc<MatchHub>,
    cursor: usize,
    live: bool,
}

impl Subscription {
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn is_live(&self) -> bool {
        self.live
    }

    fn take(&mut self) -> Result<Vec<MatchEvent>, Lagged> {
        let lag = self.hub.len().saturating_sub(self.cursor);
        if self.live && lag > MAX_SUBSCRIBER_LAG {
            return Err(Lagged { lag });
        }
        let batch = self.hub.page(self.cursor, MAX_SUBSCRIBER_LAG);
        self.cursor += batch.len();
        if self.cursor >= self.hub.len() {
            self.live = true;
        }
        Ok(batch)
    }

    /// The next page of events, without blocking.
    pub fn poll(&mut self) -> Result<Vec<MatchEvent>, Lagged> {
        self.take()
    }

    /// Like [`poll`](Self::poll) but waits up to `timeout` for something new.
    pub fn next_batch(&mut self, timeout: Duration) -> Result<Vec<MatchEvent>, Lagged> {
        self.hub.wait_beyond(self.cursor, timeout);
        self.take()
    }
}
