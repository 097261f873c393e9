//! Vehicle and RSU behavior: capture, offload choice, redundancy removal and
//! dispatch to cloud workers.

pub mod dedup;
pub mod dispatch;
pub mod offload;
pub mod phash;
pub mod record;
pub mod rsu;
pub mod vehicle;

use thiserror::Error;

pub use dedup::{DedupConfig, DedupDecision, DedupWindow};
pub use dispatch::{DispatchPolicy, Dispatcher};
pub use offload::{decide_offload, Offload, OffloadPolicy};
pub use phash::{hamming, phash};
pub use record::DetectionRecord;
pub use rsu::{Admission, RsuNode};
pub use vehicle::{Capture, VehicleConfig, VehicleNode};

#[derive(Debug, Error)]
pub enum EdgeError {
    #[error("trace exhausted")]
    TraceExhausted,
    #[error("no workers to dispatch to")]
    NoWorkers,
    #[error("bad detection record: {0}")]
    BadRecord(String),
    #[error(transparent)]
    Scene(#[from] crate::synthscene::SceneError),
}
