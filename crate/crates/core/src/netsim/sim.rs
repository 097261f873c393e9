use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Debug;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::frame::fnv1a64;

use super::clock::{ClockMode, SimTime, VirtualClock};
use super::link::{Link, LinkId, LinkParams, NodeId};
use super::wire::WireMessage;
use super::NetError;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload<T> {
    Deliver { link: LinkId, sent_at: SimTime, msg: WireMessage },
    /// A message lost on `link`; delivered to the link's destination as a record.
    Drop { link: LinkId, sent_at: SimTime, msg: WireMessage },
    Timer(T),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent<T> {
    pub due: SimTime,
    pub seq: u64,
    pub target: NodeId,
    pub payload: Payload<T>,
}

/// Receipt for a scheduled event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scheduled {
    pub due: SimTime,
    pub seq: u64,
    pub target: NodeId,
    /// The loss draw fired; a drop record was queued instead of a delivery.
    pub dropped: bool,
}

struct Queued<T>(SimEvent<T>);

impl<T> PartialEq for Queued<T> {
    fn eq(&self, other: &Self) -> bool {
        (self.0.due, self.0.seq) == (other.0.due, other.0.seq)
    }
}

impl<T> Eq for Queued<T> {}

impl<T> PartialOrd for Queued<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Queued<T> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        (other.0.due, other.0.seq).cmp(&(self.0.due, self.0.seq))
    }
}

/// One processed event as it appears in the run log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EventRecord {
    pub due_ns: u64,
    pub seq: u64,
    pub target: u32,
    pub what: String,
}

impl EventRecord {
    fn line(&self) -> String {
        format!("{} {} {} {}\n", self.due_ns, self.seq, self.target, self.what)
    }
}

/// FNV-1a over the canonical text form of a log.
pub fn log_digest(log: &[EventRecord]) -> u64 {
    let mut text = String::new();
    for r in log {
        text.push_str(&r.line());
    }
    fnv1a64(text.as_bytes())
}

/// Receives events popped by [`Network::run_until`].
pub trait Handler<T> {
    fn handle(&mut self, event: SimEvent<T>, net: &mut Network<T>);

    /// A short, deterministic description of a timer payload for the log.
    fn describe_timer(&self, timer: &T) -> String
    where
        T: Debug,
    {
        format!("{timer:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinkStats {
    pub bytes_sent: u64,
    pub messages_sent: u64,
    pub dropped: u64,
}

/// Discrete-event network: nodes, links, a (due, seq)-ordered event queue
/// and a seeded loss generator.
pub struct Network<T> {
    clock: VirtualClock,
    nodes: Vec<String>,
    links: Vec<Link>,
    queue: BinaryHeap<Queued<T>>,
    next_seq: u64,
    rng: ChaCha8Rng,
}

impl<T: Debug> Network<T> {
    pub fn new(mode: ClockMode, seed: u64) -> Self {
        Self {
            clock: VirtualClock::new(mode),
            nodes: Vec::new(),
            links: Vec::new(),
            queue: BinaryHeap::new(),
            next_seq: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn add_node(&mut self, name: impl Into<String>) -> NodeId {
        self.nodes.push(name.into());
        NodeId(self.nodes.len() as u32 - 1)
    }

    pub fn node_name(&self, id: NodeId) -> Option<&str> {
        self.nodes.get(id.0 as usize).map(String::as_str)
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n == name).map(|i| NodeId(i as u32))
    }

    pub fn add_link(&mut self, name: impl Into<String>, src: NodeId, dst: NodeId, params: LinkParams) -> Result<LinkId, NetError> {
        let name = name.into();
        if !params.is_valid() {
            return Err(NetError::BadLinkParams(name));
        }
        for n in [src, dst] {
            if n.0 as usize >= self.nodes.len() {
                return Err(NetError::UnknownNode(n));
            }
        }
        if self.links.iter().any(|l| l.name == name) {
            return Err(NetError::DuplicateLink(name));
        }
        let id = LinkId(self.links.len() as u32);
        self.links.push(Link::new(id, name, src, dst, params));
        Ok(id)
    }

    pub fn link(&self, id: LinkId) -> Result<&Link, NetError> {
        self.links.get(id.0 as usize).ok_or(NetError::UnknownLink(id))
    }

    pub fn link_by_name(&self, name: &str) -> Option<&Link> {
        self.links.iter().find(|l| l.name == name)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn now(&self) -> SimTime {
        self.clock.now()
    }

    pub fn mode(&self) -> ClockMode {
        self.clock.mode()
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn next_due(&self) -> Option<SimTime> {
        self.queue.peek().map(|q| q.0.due)
    }

    fn push(&mut self, due: SimTime, target: NodeId, payload: Payload<T>) -> Scheduled {
        let receipt = Scheduled {
            due,
            seq: self.next_seq,
            target,
            dropped: matches!(payload, Payload::Drop { .. }),
        };
        self.next_seq += 1;
        self.queue.push(Queued(SimEvent { due, seq: receipt.seq, target, payload }));
        receipt
    }

    /// Hands `msg` to `link` at the current time. The returned event is the
    /// scheduled delivery, or a drop record when the loss draw fires.
    pub fn schedule_send(&mut self, link: LinkId, msg: WireMessage) -> Result<Scheduled, NetError> {
        if msg.body.len() > u32::MAX as usize {
            return Err(NetError::MessageTooLarge(msg.body.len()));
        }
        let now = self.clock.now();
        let seq = self.next_seq;
        let l = self.links.get_mut(link.0 as usize).ok_or(NetError::UnknownLink(link))?;
        let due = l.reserve(now, msg.wire_len());
        l.bytes_sent += msg.wire_len() as u64;
        l.messages_sent += 1;
        let lost = l.params.loss_prob > 0.0 && self.rng.random_bool(l.params.loss_prob);
        l.in_flight.push_back(seq);
        let dst = l.dst;
        let payload = if lost {
            l.dropped += 1;
            Payload::Drop { link, sent_at: now, msg }
        } else {
            Payload::Deliver { link, sent_at: now, msg }
        };
        Ok(self.push(due, dst, payload))
    }

    /// Schedules a timer for `target` at `now + delay`.
    pub fn schedule_timer(&mut self, target: NodeId, delay: SimTime, timer: T) -> Scheduled {
        let due = self.clock.now() + delay;
        self.push(due, target, Payload::Timer(timer))
    }

    /// Schedules a timer at an absolute time, clamped to now.
    pub fn schedule_timer_at(&mut self, target: NodeId, at: SimTime, timer: T) -> Scheduled {
        let due = at.max(self.clock.now());
        self.push(due, target, Payload::Timer(timer))
    }

    fn pop(&mut self) -> Option<SimEvent<T>> {
        let ev = self.queue.pop()?.0;
        self.clock.advance_to(ev.due);
        if let Payload::Deliver { link, .. } | Payload::Drop { link, .. } = &ev.payload {
            let l = &mut self.links[link.0 as usize];
            let front = l.in_flight.pop_front();
            debug_assert_eq!(front, Some(ev.seq), "link {} delivered out of order", l.name);
        }
        Some(ev)
    }

    fn record<H: Handler<T>>(&self, ev: &SimEvent<T>, handler: &H) -> EventRecord {
        let what = match &ev.payload {
            Payload::Deliver { link, msg, .. } => {
                format!("deliver {} {:?} {} {:016x}", self.links[link.0 as usize].name, msg.kind, msg.wire_len(), fnv1a64(&msg.body))
            }
            Payload::Drop { link, msg, .. } => {
                format!("drop {} {:?} {} {:016x}", self.links[link.0 as usize].name, msg.kind, msg.wire_len(), fnv1a64(&msg.body))
            }
            Payload::Timer(t) => format!("timer {}", handler.describe_timer(t)),
        };
        EventRecord {
            due_ns: ev.due.as_nanos(),
            seq: ev.seq,
            target: ev.target.0,
            what,
        }
    }

    /// Processes events in `(due, seq)` order until the queue is empty or the
    /// next event is due after `t_end`. Handlers run one at a time.
    pub fn run_until<H: Handler<T>>(&mut self, handler: &mut H, t_end: SimTime) -> Vec<EventRecord> {
        let mut log = Vec::new();
        while self.next_due().is_some_and(|d| d <= t_end) {
            let ev = self.pop().expect("peeked");
            log.push(self.record(&ev, handler));
            handler.handle(ev, self);
        }
        log
    }

    /// Like [`run_until`](Self::run_until) but paced against the wall clock:
    /// an event due at `t` runs no earlier than `t / time_scale` after the
    /// call. `stop` is polled between events.
    pub fn run_realtime<H: Handler<T>>(&mut self, handler: &mut H, t_end: SimTime, time_scale: f64, stop: &dyn Fn() -> bool) -> Vec<EventRecord> {
        let origin = Instant::now();
        let base = self.clock.now();
        let mut log = Vec::new();
        while let Some(due) = self.next_due().filter(|d| *d <= t_end) {
            if stop() {
                break;
            }
            let wall_target = Duration::from_secs_f64((due.saturating_sub(base)).as_secs_f64() / time_scale.max(1e-9));
            let elapsed = origin.elapsed();
            if wall_target > elapsed {
                // sleep in slices so `stop` stays responsive
                std::thread::sleep((wall_target - elapsed).min(Duration::from_millis(50)));
                continue;
            }
            let ev = self.pop().expect("peeked");
            log.push(self.record(&ev, handler));
            handler.handle(ev, self);
        }
        log
    }

    pub fn link_stats(&self) -> BTreeMap<String, LinkStats> {
        self.links
            .iter()
            .map(|l| {
                (
                    l.name.clone(),
                    LinkStats {
                        bytes_sent: l.bytes_sent,
                        messages_sent: l.messages_sent,
                        dropped: l.dropped,
                    },
                )
            })
            .collect()
    }
}
