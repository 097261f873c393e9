use crate::extract::{run_stages, ExtractConfig, Finding};
use crate::frame::GeoFrame;
use crate::netsim::{transfer_time, LinkParams, MessageKind, WireMessage, FRAMING_LEN};
use crate::synthscene::{compose_frame, Trace};

use super::offload::{decide_offload, Offload, OffloadPolicy};
use super::record::DetectionRecord;
use super::EdgeError;

#[derive(Debug, Clone)]
pub struct VehicleConfig {
    pub policy: OffloadPolicy,
    pub local_extract_enabled: bool,
    pub uplink: LinkParams,
    pub frame_width: u16,
    pub frame_height: u16,
    pub noise_level: f64,
    pub noise_seed: u64,
    pub extract: ExtractConfig,
}

/// What the vehicle produced for one trace step.
#[derive(Debug, Clone)]
pub struct Capture {
    pub step: usize,
    pub frame: GeoFrame,
    pub offload: Offload,
    pub estimated_upload_s: f64,
    pub messages: Vec<WireMessage>,
}

#[derive(Debug, Clone)]
pub struct VehicleNode {
    trace: Trace,
    cursor: usize,
    config: VehicleConfig,
}

impl VehicleNode {
    pub fn new(trace: Trace, config: VehicleConfig) -> Self {
        Self {
            trace,
            cursor: 0,
            config,
        }
    }

    pub fn vehicle_id(&self) -> u64 {
        self.trace.vehicle_id
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn config(&self) -> &VehicleConfig {
        &self.config
    }

    pub fn remaining(&self) -> usize {
        self.trace.steps.len() - self.cursor
    }

    /// Renders the next trace step and builds its outgoing messages: one
    /// FRAME_UPLOAD when central, otherwise a DETECTION_RECORD per plate and
    /// face found on board (a lone GPS record when nothing else is found).
    pub fn capture_tick(&mut self) -> Result<Capture, EdgeError> {
        let step = self.trace.steps.get(self.cursor).ok_or(EdgeError::TraceExhausted)?;
        let cfg = &self.config;
        let frame = compose_frame(
            &step.scene,
            step.fix.with_timestamp(step.t_ms),
            self.trace.vehicle_id,
            cfg.frame_width,
            cfg.frame_height,
            cfg.noise_level,
            step.noise_seed(cfg.noise_seed, self.trace.vehicle_id),
        )?;
        let estimated_upload_s = transfer_time(frame.encoded_len() + FRAMING_LEN, &cfg.uplink);
        let offload = decide_offload(cfg.policy, estimated_upload_s, cfg.local_extract_enabled);
        let messages = match offload {
            Offload::Central => vec![WireMessage::new(MessageKind::FrameUpload, frame.encode())],
            Offload::Local => self.local_records(&frame),
        };
        let capture = Capture {
            step: self.cursor,
            frame,
            offload,
            estimated_upload_s,
            messages,
        };
        self.cursor += 1;
        Ok(capture)
    }

    fn local_records(&self, frame: &GeoFrame) -> Vec<WireMessage> {
        let worker_id = format!("vehicle-{}", self.trace.vehicle_id);
        let outputs = run_stages(frame, &self.config.extract, false);
        let mut findings: Vec<Finding> = Vec::new();
        let mut gps = None;
        for out in outputs {
            for f in out.findings {
                if f.bbox.is_some() {
                    findings.push(f);
                } else {
                    gps = Some(f);
                }
            }
        }
        if findings.is_empty() {
            findings.extend(gps);
        }
        findings
            .into_iter()
            .map(|mut f| {
                let crop = f.crop.take();
                let det = f.into_detection(frame, &worker_id, frame.timestamp_ms(), None);
                DetectionRecord::new(det, crop.as_deref()).to_message()
            })
            .collect()
    }
}
