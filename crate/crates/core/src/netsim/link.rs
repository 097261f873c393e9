use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::clock::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkId(pub u32);

/// Affine link model: fixed latency plus serialization at a fixed bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub base_latency_s: f64,
    #[serde(rename = "bandwidth_Bps")]
    pub bandwidth_bps: f64,
    #[serde(default)]
    pub loss_prob: f64,
}

impl LinkParams {
    pub fn is_valid(&self) -> bool {
        self.base_latency_s >= 0.0
            && self.base_latency_s.is_finite()
            && self.bandwidth_bps > 0.0
            && self.bandwidth_bps.is_finite()
            && (0.0..=1.0).contains(&self.loss_prob)
    }

    pub fn serialization_s(&self, payload_bytes: usize) -> f64 {
        payload_bytes as f64 / self.bandwidth_bps
    }
}

/// Seconds for `payload_bytes` to cross an idle link.
pub fn transfer_time(payload_bytes: usize, link: &LinkParams) -> f64 {
    link.base_latency_s + link.serialization_s(payload_bytes)
}

/// A directed link with its transmit queue state.
#[derive(Debug, Clone)]
pub struct Link {
    pub id: LinkId,
    pub name: String,
    pub src: NodeId,
    pub dst: NodeId,
    pub params: LinkParams,
    /// When the transmitter finishes the last queued message.
    pub(crate) free_at: SimTime,
    /// Sequence numbers of messages sent but not yet delivered, in send order.
    pub(crate) in_flight: VecDeque<u64>,
    pub bytes_sent: u64,
    pub messages_sent: u64,
    pub dropped: u64,
}

impl Link {
    pub fn new(id: LinkId, name: impl Into<String>, src: NodeId, dst: NodeId, params: LinkParams) -> Self {
        Self {
            id,
            name: name.into(),
            src,
            dst,
            params,
            free_at: SimTime::ZERO,
            in_flight: VecDeque::new(),
            bytes_sent: 0,
            messages_sent: 0,
            dropped: 0,
        }
    }

    pub fn in_flight(&self) -> usize {
        self.in_flight.len()
    }

    /// Reserves the transmitter for a message handed over at `now` and
    /// returns its delivery time. A message waits for every earlier message
    /// on the link to finish serializing before it starts.
    pub(crate) fn reserve(&mut self, now: SimTime, payload_bytes: usize) -> SimTime {
        let start = now.max(self.free_at);
        let done = start + SimTime::from_secs_f64(self.params.serialization_s(payload_bytes));
        self.free_at = done;
        done + SimTime::from_secs_f64(self.params.base_latency_s)
    }
}
