use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum OffloadPolicy {
    #[default]
    AlwaysCentral,
    AlwaysLocal,
    Adaptive { threshold_s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Offload {
    Local,
    Central,
}

/// Local extraction is only chosen when the vehicle is able to run it.
pub fn decide_offload(policy: OffloadPolicy, estimated_upload_s: f64, local_enabled: bool) -> Offload {
    let local = match policy {
        OffloadPolicy::AlwaysCentral => false,
        OffloadPolicy::AlwaysLocal => true,
        OffloadPolicy::Adaptive { threshold_s } => estimated_upload_s > threshold_s,
    };
    if local && local_enabled {
        Offload::Local
    } else {
        Offload::Central
    }
}
