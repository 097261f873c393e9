//! Service tier: watchlist matching, match publication, request load
//! balancing and the HTTP API surface.

pub mod api;
pub mod hub;
pub mod lb;
pub mod matcher;

use std::sync::Arc;

use parking_lot::RwLock;
use serde_json::Value;
use thiserror::Error;

use crate::model::{Detection, MatchEvent};
use crate::store::{StoreError, Stores};

pub use api::{serve_api, ApiBody, ApiRequest, ApiResponse, Method};
pub use hub::{Lagged, MatchHub, Subscription, MAX_SUBSCRIBER_LAG};
pub use lb::LoadBalancer;
pub use matcher::{entry_matches, matching_entries};

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("no web workers")]
    NoWorkers,
}

/// Shared state behind the load balancer: every web worker serves from the
/// same stores and match hub.
#[derive(Debug)]
pub struct Gateway {
    pub stores: Arc<Stores>,
    pub hub: Arc<MatchHub>,
    pub lb: LoadBalancer,
    pub t_face: u32,
    metrics: RwLock<Value>,
}

impl Gateway {
    pub fn new(stores: Arc<Stores>, web_workers: usize, t_face: u32) -> Self {
        Self {
            stores,
            hub: Arc::new(MatchHub::new()),
            lb: LoadBalancer::new(web_workers),
            t_face,
            metrics: RwLock::new(Value::Object(Default::default())),
        }
    }

    /// Persists a detection and publishes its matches against the current
    /// watchlist.
    pub fn persist(&self, d: Detection, now_ms: u64) -> (Detection, Vec<MatchEvent>) {
        let id = self.stores.detections.put_detection(d);
        let d = self.stores.detections.get(id).expect("just appended");
        let events = self.match_detection(&d, now_ms);
        (d, events)
    }

    pub fn match_detection(&self, d: &Detection, now_ms: u64) -> Vec<MatchEvent> {
        let entries = self.stores.watchlist.list();
        self.hub
            .publish(d.detection_id, matching_entries(d, &entries, self.t_face), d.fix, now_ms)
    }

    /// Re-matches the whole detection log against one entry. Pairs already
    /// published are skipped.
    pub fn rescan(&self, entry_id: u64, now_ms: u64) -> Result<Vec<MatchEvent>, StoreError> {
        let entry = self.stores.watchlist.get(entry_id)?;
        let mut out = Vec::new();
        for d in self.stores.detections.all() {
            if entry_matches(&entry, &d, self.t_face) {
                out.extend(self.hub.publish(d.detection_id, [entry_id], d.fix, now_ms));
            }
        }
        Ok(out)
    }

    pub fn set_metrics(&self, v: Value) {
        *self.metrics.write() = v;
    }

    pub fn metrics(&self) -> Value {
        self.metrics.read().clone()
    }

    /// Routes through the load balancer, then serves.
    pub fn handle(&self, req: &ApiRequest) -> (usize, ApiResponse) {
        match self.lb.route() {
            Ok(w) => (w, serve_api(self, req)),
            Err(e) => (usize::MAX, ApiResponse::error(503, e)),
        }
    }
}
