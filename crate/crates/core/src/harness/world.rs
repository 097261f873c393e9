use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use crate::edge::{DetectionRecord, Offload, RsuNode, VehicleConfig, VehicleNode};
use crate::extract::{ExtractCounters, Finding, ProcessPlan, Stage, WorkerNode};
use crate::frame::{FrameId, GeoFrame};
use crate::gateway::Gateway;
use crate::model::Detection;
use crate::netsim::{log_digest, ClockMode, EventRecord, Handler, LinkId, MessageKind, Network, NodeId, Payload, SimEvent, SimTime, WireMessage};
use crate::store::Stores;
use crate::synthscene::Trace;

use super::config::ScenarioConfig;
use super::metrics::{Metric, MetricsReport, Samples};
use super::HarnessError;

#[derive(Debug)]
pub enum Timer {
    Capture(usize),
    /// On-board extraction finished; send the records.
    LocalExtractDone { vehicle: usize, messages: Vec<WireMessage> },
    StageDone { worker: usize, stage: usize },
    FrameDone(usize),
}

#[derive(Debug, Clone, Copy)]
enum Role {
    Vehicle,
    Rsu,
    Worker(usize),
    Gateway,
}

struct VehicleSlot {
    node: VehicleNode,
    id: NodeId,
    uplink: LinkId,
}

struct WorkerSlot {
    node: WorkerNode,
    id: NodeId,
    ack: LinkId,
    current: Option<ProcessPlan>,
}

/// Records still travelling for one locally processed frame.
struct LocalTrack {
    captured_at: SimTime,
    remaining: usize,
    delivered: bool,
}

struct World {
    epoch_ms: u64,
    measured: bool,
    modeled_local_s: Option<f64>,
    roles: Vec<Role>,
    vehicles: Vec<VehicleSlot>,
    rsu: RsuNode,
    rsu_down: Vec<LinkId>,
    rsu_gw: LinkId,
    workers: Vec<WorkerSlot>,
    gateway: Arc<Gateway>,
    local: BTreeMap<FrameId, LocalTrack>,
    samples: Samples,
    frames_captured: u64,
    offloaded: u64,
    frame_drops: u64,
    detections: u64,
    matches: u64,
    errors: Vec<String>,
    publish_live: bool,
}

/// Everything a run leaves behind.
pub struct ScenarioOutput {
    pub report: MetricsReport,
    pub log: Vec<EventRecord>,
    pub gateway: Arc<Gateway>,
    pub traces: Vec<Trace>,
}

impl ScenarioOutput {
    pub fn stores(&self) -> &Stores {
        &self.gateway.stores
    }
}

/// External handles for a run: a gateway to publish into (so an API can
/// serve it live) and a stop flag for realtime runs.
#[derive(Default)]
pub struct RunHooks {
    pub gateway: Option<Arc<Gateway>>,
    pub stop: Option<Arc<AtomicBool>>,
}

impl World {
    fn sim_ms(&self, t: SimTime) -> u64 {
        self.epoch_ms + t.as_millis()
    }

    fn captured_at(&self, frame: &GeoFrame) -> SimTime {
        SimTime::from_millis(frame.timestamp_ms().saturating_sub(self.epoch_ms))
    }

    /// Duration of in-process work: measured in realtime runs, free in
    /// virtual ones so that logs stay deterministic.
    fn cost(&self, started: Instant) -> SimTime {
        if self.measured {
            SimTime(started.elapsed().as_nanos() as u64)
        } else {
            SimTime::ZERO
        }
    }

    fn fail(&mut self, net: &Network<Timer>, what: impl std::fmt::Display) {
        self.errors.push(format!("t={:.6}s {what}", net.now().as_secs_f64()));
    }

    fn send(&mut self, net: &mut Network<Timer>, link: LinkId, msg: WireMessage) {
        if let Err(e) = net.schedule_send(link, msg) {
            self.fail(net, e);
        }
    }

    fn schedule_capture(&self, net: &mut Network<Timer>, v: usize) {
        let slot = &self.vehicles[v];
        if let Some(step) = slot.node.trace().steps.get(slot.node.cursor()) {
            let at = SimTime::from_millis(step.t_ms - self.epoch_ms);
            net.schedule_timer_at(slot.id, at, Timer::Capture(v));
        }
    }

    fn on_capture(&mut self, net: &mut Network<Timer>, v: usize, me: NodeId) {
        match self.vehicles[v].node.capture_tick() {
            Ok(cap) => {
                self.frames_captured += 1;
                match cap.offload {
                    Offload::Central => {
                        let uplink = self.vehicles[v].uplink;
                        for m in cap.messages {
                            self.send(net, uplink, m);
                        }
                    }
                    Offload::Local => {
                        self.offloaded += 1;
                        self.local.insert(
                            cap.frame.frame_id(),
                            LocalTrack {
                                captured_at: net.now(),
                                remaining: cap.messages.len(),
                                delivered: false,
                            },
                        );
                        let delay = SimTime::from_secs_f64(self.modeled_local_s.unwrap_or(0.0));
                        net.schedule_timer(me, delay, Timer::LocalExtractDone {
                            vehicle: v,
                            messages: cap.messages,
                        });
                    }
                }
            }
            Err(e) => self.fail(net, format!("vehicle {v}: {e}")),
        }
        self.schedule_capture(net, v);
    }

    fn on_rsu(&mut self, net: &mut Network<Timer>, sent_at: SimTime, msg: WireMessage) {
        match msg.kind {
            MessageKind::FrameUpload => {
                self.samples.record(Metric::UploadV2i, net.now() - sent_at);
                let frame = match GeoFrame::decode(&msg.body) {
                    Ok(f) => f,
                    Err(e) => return self.fail(net, format!("rsu: {e}")),
                };
                let t = Instant::now();
                let decision = self.rsu.dedup_check(&frame);
                self.samples.record(Metric::Dedup, self.cost(t));
                if decision.duplicate {
                    return;
                }
                let t = Instant::now();
                match self.rsu.dispatch() {
                    Ok(w) => {
                        self.samples.record(Metric::Dispatch, self.cost(t));
                        self.send(net, self.rsu_down[w], msg);
                    }
                    Err(e) => self.fail(net, format!("rsu: {e}")),
                }
            }
            MessageKind::DetectionRecord => self.send(net, self.rsu_gw, msg),
            MessageKind::Ack => match ack_worker(&msg) {
                Some(w) => self.rsu.ack(w),
                None => self.fail(net, "rsu: malformed ack"),
            },
            MessageKind::Control => {}
        }
    }

    fn on_worker_frame(&mut self, net: &mut Network<Timer>, w: usize, sent_at: SimTime, msg: WireMessage) {
        self.samples.record(Metric::TransferRsuCloud, net.now() - sent_at);
        match GeoFrame::decode(&msg.body) {
            Ok(frame) => {
                self.workers[w].node.enqueue(frame, net.now());
                self.try_start(net, w);
            }
            Err(e) => self.fail(net, format!("worker {w}: {e}")),
        }
    }

    fn try_start(&mut self, net: &mut Network<Timer>, w: usize) {
        let slot = &mut self.workers[w];
        let Some(plan) = slot.node.start_next(net.now(), self.measured) else {
            return;
        };
        for (i, s) in plan.stages.iter().enumerate() {
            net.schedule_timer_at(slot.id, s.completes_at, Timer::StageDone { worker: w, stage: i });
        }
        net.schedule_timer_at(slot.id, plan.completes_at(), Timer::FrameDone(w));
        slot.current = Some(plan);
    }

    fn on_stage_done(&mut self, net: &mut Network<Timer>, w: usize, stage: usize) {
        let slot = &mut self.workers[w];
        let plan = slot.current.as_mut().expect("stage of a running frame");
        let sp = &mut plan.stages[stage];
        let metric = match sp.stage() {
            Stage::Face => Metric::ExtractFace,
            Stage::Plate => Metric::ExtractPlate,
            Stage::Gps => Metric::ExtractGps,
        };
        let elapsed = sp.completes_at - plan.started_at;
        let findings = std::mem::take(&mut sp.output.findings);
        let error = sp.output.error.take();
        let frame = plan.frame.clone();
        let worker_id = slot.node.worker_id.clone();
        self.samples.record(metric, elapsed);
        if let Some(e) = error {
            self.fail(net, format!("{worker_id}: {e}"));
        }
        let now_ms = self.sim_ms(net.now());
        for f in findings {
            let (crop_blob, f) = self.store_crop(f);
            self.persist(f.into_detection(&frame, &worker_id, now_ms, crop_blob), now_ms);
        }
    }

    fn store_crop(&self, mut f: Finding) -> (Option<crate::model::BlobDigest>, Finding) {
        let blob = f.crop.take().map(|c| self.gateway.stores.blobs.put_blob(c));
        (blob, f)
    }

    fn persist(&mut self, d: Detection, now_ms: u64) {
        let t = Instant::now();
        let id = self.gateway.stores.detections.put_detection(d);
        self.samples.record(Metric::Persist, self.cost(t));
        let d = self.gateway.stores.detections.get(id).expect("just stored");
        let t = Instant::now();
        let events = self.gateway.match_detection(&d, now_ms);
        self.samples.record(Metric::Match, self.cost(t));
        self.detections += 1;
        self.matches += events.len() as u64;
    }

    fn on_frame_done(&mut self, net: &mut Network<Timer>, w: usize) {
        let slot = &mut self.workers[w];
        let plan = slot.current.take().expect("running frame");
        slot.node.finish();
        let ack = slot.ack;
        let captured = self.captured_at(&plan.frame);
        self.samples.record(Metric::EndToEnd, net.now() - captured);
        let body = serde_json::to_vec(&serde_json::json!({ "worker": w, "frame_id": plan.frame.frame_id() })).expect("ack body");
        self.send(net, ack, WireMessage::new(MessageKind::Ack, body));
        self.try_start(net, w);
        self.publish_metrics(net);
    }

    fn on_record(&mut self, net: &mut Network<Timer>, msg: WireMessage, delivered: bool) {
        let rec = match DetectionRecord::from_message(&msg) {
            Ok(r) => r,
            Err(e) => return self.fail(net, format!("gateway: {e}")),
        };
        let frame_id = rec.detection.source_frame;
        if delivered {
            let now_ms = self.sim_ms(net.now());
            match rec.crop_png() {
                Ok(crop) => {
                    let mut d = rec.detection;
                    d.crop_blob = crop.map(|c| self.gateway.stores.blobs.put_blob(c));
                    d.detected_at_ms = now_ms;
                    self.persist(d, now_ms);
                }
                Err(e) => self.fail(net, format!("gateway: {e}")),
            }
        }
        let now = net.now();
        if let Some(track) = self.local.get_mut(&frame_id) {
            track.remaining -= 1;
            track.delivered |= delivered;
            if track.remaining == 0 {
                let track = self.local.remove(&frame_id).expect("present");
                if track.delivered {
                    self.samples.record(Metric::EndToEnd, now - track.captured_at);
                } else {
                    self.frame_drops += 1;
                }
                self.publish_metrics(net);
            }
        }
    }

    /// `log` is only available once a run has finished.
    fn report(&self, net: &Network<Timer>, log: Option<&[EventRecord]>) -> MetricsReport {
        let mut extract = ExtractCounters::default();
        for w in &self.workers {
            extract.absorb(&w.node.counters);
        }
        MetricsReport {
            stages: self.samples.stats(),
            frames_captured: self.frames_captured,
            frames_offloaded_local: self.offloaded,
            dedup_suppressed: self.rsu.suppressed(),
            drops: self.frame_drops,
            frames_processed: self.workers.iter().map(|w| w.node.processed).sum(),
            detections: self.detections,
            matches: self.matches,
            worker_frames: self.workers.iter().map(|w| w.node.processed).collect(),
            bytes_sent: net.link_stats().into_iter().map(|(k, v)| (k, v.bytes_sent)).collect(),
            extract,
            errors: self.errors.clone(),
            virtual_end_s: net.now().as_secs_f64(),
            event_log_digest: log.map(|l| format!("{:016x}", log_digest(l))).unwrap_or_default(),
        }
    }

    fn publish_metrics(&mut self, net: &Network<Timer>) {
        if self.publish_live {
            let r = self.report(net, None);
            self.gateway.set_metrics(serde_json::to_value(&r).expect("report serializes"));
        }
    }
}

fn ack_worker(msg: &WireMessage) -> Option<usize> {
    let v: serde_json::Value = serde_json::from_slice(&msg.body).ok()?;
    v.get("worker")?.as_u64().map(|w| w as usize)
}

impl Handler<Timer> for World {
    fn handle(&mut self, ev: SimEvent<Timer>, net: &mut Network<Timer>) {
        let role = self.roles[ev.target.0 as usize];
        match (role, ev.payload) {
            (Role::Vehicle, Payload::Timer(Timer::Capture(v))) => self.on_capture(net, v, ev.target),
            (Role::Vehicle, Payload::Timer(Timer::LocalExtractDone { vehicle, messages })) => {
                let uplink = self.vehicles[vehicle].uplink;
                for m in messages {
                    self.send(net, uplink, m);
                }
            }
            (Role::Rsu, Payload::Deliver { sent_at, msg, .. }) => self.on_rsu(net, sent_at, msg),
            (Role::Rsu, Payload::Drop { msg, .. }) => match msg.kind {
                MessageKind::FrameUpload => self.frame_drops += 1,
                MessageKind::DetectionRecord => self.on_record(net, msg, false),
                _ => {}
            },
            (Role::Worker(w), Payload::Deliver { sent_at, msg, .. }) => self.on_worker_frame(net, w, sent_at, msg),
            (Role::Worker(_), Payload::Drop { .. }) => self.frame_drops += 1,
            (Role::Worker(_), Payload::Timer(Timer::StageDone { worker, stage })) => self.on_stage_done(net, worker, stage),
            (Role::Worker(_), Payload::Timer(Timer::FrameDone(w))) => self.on_frame_done(net, w),
            (Role::Gateway, Payload::Deliver { msg, .. }) => self.on_record(net, msg, true),
            (Role::Gateway, Payload::Drop { msg, .. }) => self.on_record(net, msg, false),
            (role, payload) => self.fail(net, format!("{role:?} cannot handle {payload:?}")),
        }
    }

    fn describe_timer(&self, t: &Timer) -> String {
        match t {
            Timer::Capture(v) => format!("capture vehicle-{v}"),
            Timer::LocalExtractDone { vehicle, messages } => format!("local-extract vehicle-{vehicle} {} records", messages.len()),
            Timer::StageDone { worker, stage } => format!("stage worker-{worker} {:?}", Stage::ALL[*stage]),
            Timer::FrameDone(w) => format!("frame-done worker-{w}"),
        }
    }
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput, HarnessError> {
    run_scenario_with(cfg, RunHooks::default())
}

/// Builds the topology, replays every trace through
/// vehicle, RSU, workers, store and gateway, and reports.
pub fn run_scenario_with(cfg: &ScenarioConfig, hooks: RunHooks) -> Result<ScenarioOutput, HarnessError> {
    cfg.validate()?;
    let traces = cfg.load_traces()?;
    let epoch_ms = traces
        .iter()
        .filter_map(|t| t.steps.first().map(|s| s.t_ms))
        .min()
        .unwrap_or(0);
    let gateway = match hooks.gateway {
        Some(g) => g,
        None => Arc::new(Gateway::new(Arc::new(Stores::new()), cfg.web_workers, cfg.t_face)),
    };
    for w in &cfg.watchlist {
        match gateway.stores.watchlist.add_json(&w.kind, &w.value, &w.label, epoch_ms) {
            Ok(_) | Err(crate::store::StoreError::DuplicateEntry(_)) => {}
            Err(e) => return Err(HarnessError::ConfigInvalid(format!("watchlist: {e}"))),
        }
    }

    let (up, down) = cfg.links.resolve();
    let ack_params = crate::netsim::LinkParams { loss_prob: 0.0, ..down };
    let mut net: Network<Timer> = Network::new(cfg.mode, cfg.seed);
    let mut roles = Vec::new();
    let rsu_id = net.add_node("rsu-0");
    roles.push(Role::Rsu);
    let gw_id = net.add_node("gateway");
    roles.push(Role::Gateway);
    let mut vehicles = Vec::new();
    for (i, trace) in traces.iter().enumerate() {
        let id = net.add_node(format!("vehicle-{i}"));
        roles.push(Role::Vehicle);
        let uplink = net.add_link(format!("vehicle-{i}->rsu-0"), id, rsu_id, up)?;
        let vc = VehicleConfig {
            policy: cfg.offload,
            local_extract_enabled: cfg.local_extract_enabled,
            uplink: up,
            frame_width: cfg.frame_width,
            frame_height: cfg.frame_height,
            noise_level: cfg.noise_level,
            noise_seed: cfg.seed,
            extract: cfg.extract.clone(),
        };
        vehicles.push(VehicleSlot {
            node: VehicleNode::new(trace.clone(), vc),
            id,
            uplink,
        });
    }
    let mut workers = Vec::new();
    let mut rsu_down = Vec::new();
    for j in 0..cfg.workers {
        let id = net.add_node(format!("worker-{j}"));
        roles.push(Role::Worker(j));
        rsu_down.push(net.add_link(format!("rsu-0->worker-{j}"), rsu_id, id, down)?);
        let ack = net.add_link(format!("worker-{j}->rsu-0"), id, rsu_id, ack_params)?;
        workers.push(WorkerSlot {
            node: WorkerNode::new(format!("worker-{j}"), cfg.modeled_times, cfg.extract.clone()),
            id,
            ack,
            current: None,
        });
    }
    let rsu_gw = net.add_link("rsu-0->gateway", rsu_id, gw_id, down)?;

    let measured = cfg.mode == ClockMode::Realtime;
    let mut world = World {
        epoch_ms,
        measured,
        modeled_local_s: cfg.modeled_times.map(|m| m.frame_s()),
        roles,
        vehicles,
        rsu: RsuNode::new("rsu-0", cfg.dedup, cfg.dispatch, cfg.workers),
        rsu_down,
        rsu_gw,
        workers,
        gateway: Arc::clone(&gateway),
        local: BTreeMap::new(),
        samples: Samples::default(),
        frames_captured: 0,
        offloaded: 0,
        frame_drops: 0,
        detections: 0,
        matches: 0,
        errors: Vec::new(),
        publish_live: measured,
    };
    for v in 0..world.vehicles.len() {
        world.schedule_capture(&mut net, v);
    }
    let t_end = cfg.t_end_ms.map_or(SimTime(u64::MAX), SimTime::from_millis);
    let log = match cfg.mode {
        ClockMode::Virtual => net.run_until(&mut world, t_end),
        ClockMode::Realtime => {
            let stop = hooks.stop.unwrap_or_default();
            net.run_realtime(&mut world, t_end, cfg.time_scale, &|| stop.load(Ordering::Relaxed))
        }
    };
    let report = world.report(&net, Some(&log));
    gateway.set_metrics(serde_json::to_value(&report).expect("report serializes"));
    Ok(ScenarioOutput {
        report,
        log,
        gateway,
        traces,
    })
}
