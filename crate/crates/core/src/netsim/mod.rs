//! Discrete-event network model.
//!
//! Links follow an affine model (fixed latency plus serialization at a
//! fixed bandwidth) with per-link FIFO delivery. Events are totally ordered
//! by `(due, seq)`, so a run is a deterministic function of its inputs and
//! seed in virtual mode.

pub mod calibrate;
pub mod clock;
pub mod link;
pub mod sim;
pub mod topology;
pub mod wire;

use thiserror::Error;

pub use calibrate::{calibrate_table1, Calibration};
pub use clock::{ClockMode, SimTime, VirtualClock};
pub use link::{transfer_time, Link, LinkId, LinkParams, NodeId};
pub use sim::{log_digest, EventRecord, Handler, LinkStats, Network, Payload, Scheduled, SimEvent};
pub use topology::{LinkSpec, NodeRole, NodeSpec, Topology};
pub use wire::{MessageKind, WireMessage, FRAMING_LEN};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetError {
    #[error("unknown link {0:?}")]
    UnknownLink(LinkId),
    #[error("unknown node {0:?}")]
    UnknownNode(NodeId),
    #[error("duplicate link {0}")]
    DuplicateLink(String),
    #[error("invalid parameters for link {0}")]
    BadLinkParams(String),
    #[error("message body of {0} bytes exceeds the u32 length field")]
    MessageTooLarge(usize),
    #[error("message shorter than its framing")]
    ShortMessage,
    #[error("unknown message type {0}")]
    BadMessageType(u8),
    #[error("bad topology: {0}")]
    BadTopology(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calibrated_pair() -> (Network<u32>, LinkId, LinkId) {
        let cal = calibrate_table1();
        let mut net = Network::new(ClockMode::Virtual, 1);
        let v = net.add_node("vehicle");
        let r = net.add_node("rsu");
        let w = net.add_node("worker");
        let up = net.add_link("up", v, r, cal.vehicle_rsu).unwrap();
        let down = net.add_link("down", r, w, cal.rsu_cloud).unwrap();
        (net, up, down)
    }

    /// Forwards every delivery at the RSU onto the downlink.
    struct Relay {
        down: LinkId,
        delivered: Vec<(SimTime, String)>,
    }

    impl Handler<u32> for Relay {
        fn handle(&mut self, ev: SimEvent<u32>, net: &mut Network<u32>) {
            if let Payload::Deliver { link, msg, .. } = ev.payload {
                let name = net.link(link).unwrap().name.clone();
                self.delivered.push((ev.due, name.clone()));
                if name == "up" {
                    net.schedule_send(self.down, msg).unwrap();
                }
            }
        }
    }

    fn payload() -> WireMessage {
        WireMessage::new(MessageKind::FrameUpload, vec![0; 16_500 - wire::FRAMING_LEN])
    }

    #[test]
    fn fifo_serialization_on_one_link() {
        let (mut net, up, _) = calibrated_pair();
        let a = net.schedule_send(up, payload()).unwrap();
        let b = net.schedule_send(up, payload()).unwrap();
        assert_eq!(a.due, SimTime::from_secs_f64(1.33));
        assert_eq!(b.due, SimTime::from_secs_f64(2.61));
        assert!(a.seq < b.seq);
    }

    #[test]
    fn single_frame_two_hops() {
        let (mut net, up, down) = calibrated_pair();
        net.schedule_send(up, payload()).unwrap();
        let mut relay = Relay { down, delivered: vec![] };
        let log = net.run_until(&mut relay, SimTime::from_secs_f64(100.0));
        assert_eq!(log.len(), 2);
        assert_eq!(relay.delivered[0], (SimTime::from_secs_f64(1.33), "up".to_string()));
        assert_eq!(relay.delivered[1], (SimTime::from_secs_f64(2.45), "down".to_string()));
        assert_eq!(net.now(), SimTime::from_secs_f64(2.45));
    }

    #[test]
    fn empty_queue_leaves_clock() {
        let (mut net, _, down) = calibrated_pair();
        let mut relay = Relay { down, delivered: vec![] };
        assert!(net.run_until(&mut relay, SimTime::from_secs_f64(5.0)).is_empty());
        assert_eq!(net.now(), SimTime::ZERO);
    }

    #[test]
    fn stops_at_horizon() {
        let (mut net, up, down) = calibrated_pair();
        net.schedule_send(up, payload()).unwrap();
        let mut relay = Relay { down, delivered: vec![] };
        let log = net.run_until(&mut relay, SimTime::from_secs_f64(2.0));
        assert_eq!(log.len(), 1);
        assert_eq!(net.pending(), 1);
    }

    #[test]
    fn timers_tie_break_by_insertion() {
        let mut net: Network<u32> = Network::new(ClockMode::Virtual, 0);
        let n = net.add_node("n");
        for tag in [3, 1, 2] {
            net.schedule_timer(n, SimTime(10), tag);
        }
        struct Collect(Vec<u32>);
        impl Handler<u32> for Collect {
            fn handle(&mut self, ev: SimEvent<u32>, _: &mut Network<u32>) {
                if let Payload::Timer(t) = ev.payload {
                    self.0.push(t);
                }
            }
        }
        let mut c = Collect(vec![]);
        net.run_until(&mut c, SimTime(10));
        assert_eq!(c.0, vec![3, 1, 2]);
    }

    #[test]
    fn loss_extremes() {
        for (p, want_drops) in [(0.0, 0), (1.0, 20)] {
            let mut net: Network<u32> = Network::new(ClockMode::Virtual, 5);
            let a = net.add_node("a");
            let b = net.add_node("b");
            let l = net
                .add_link(
                    "l",
                    a,
                    b,
                    LinkParams {
                        base_latency_s: 0.0,
                        bandwidth_bps: 1e6,
                        loss_prob: p,
                    },
                )
                .unwrap();
            let drops = (0..20).filter(|_| net.schedule_send(l, WireMessage::new(MessageKind::Control, vec![])).unwrap().dropped).count();
            assert_eq!(drops, want_drops);
            assert_eq!(net.link_stats()["l"].dropped, want_drops as u64);
        }
    }

    #[test]
    fn unknown_link() {
        let (mut net, _, _) = calibrated_pair();
        assert_eq!(
            net.schedule_send(LinkId(9), payload()).unwrap_err(),
            NetError::UnknownLink(LinkId(9))
        );
    }
}
