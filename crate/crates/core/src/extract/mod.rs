//! Cloud-worker recognition: GPS, plate and face-marker extraction.
//!
//! The three extractors are independent stages. Their results are exact on
//! synthetic imagery; their latency is modeled separately through
//! [`ModeledTimes`] so that compute correctness and timing can be tested
//! apart from each other.

pub mod components;
pub mod crop;
pub mod face;
pub mod plate;
pub mod worker;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::GeoFrame;
use crate::model::{BlobDigest, Detection, Observation};

pub use components::BBox;
pub use face::{find_faces, FaceCandidate};
pub use plate::{find_plates, PlateCandidate};
pub use worker::{ProcessPlan, StagePlan, WorkerNode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtractError {
    #[error("frame carries no GPS fix")]
    MissingFix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractConfig {
    pub threshold: u8,
    /// Accepted width/height range for plate candidates.
    pub plate_aspect: (f64, f64),
    pub face_aspect: (f64, f64),
    /// Minimum white fraction of a candidate's outer border band.
    pub border_min_fill: f64,
    /// Attach PNG crops to plate and face findings.
    pub crops: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        Self {
            threshold: 128,
            plate_aspect: (3.0, 4.5),
            face_aspect: (0.9, 1.1),
            border_min_fill: 0.9,
            crops: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractCounters {
    pub ambiguous_glyphs: u64,
    pub parity_failures: u64,
}

impl ExtractCounters {
    pub fn absorb(&mut self, other: &ExtractCounters) {
        self.ambiguous_glyphs += other.ambiguous_glyphs;
        self.parity_failures += other.parity_failures;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Face,
    Plate,
    Gps,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Face, Stage::Plate, Stage::Gps];
}

/// Modeled per-stage service times in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeledTimes {
    pub face_s: f64,
    pub plate_s: f64,
    #[serde(default = "default_gps_s")]
    pub gps_s: f64,
}

fn default_gps_s() -> f64 {
    0.01
}

impl ModeledTimes {
    /// Face and plate times from the reference workstation measurements;
    /// GPS extraction is a header copy and gets a nominal 10 ms.
    pub const TABLE1: ModeledTimes = ModeledTimes {
        face_s: 1.08,
        plate_s: 3.29,
        gps_s: 0.01,
    };

    pub fn stage_s(&self, stage: Stage) -> f64 {
        match stage {
            Stage::Face => self.face_s,
            Stage::Plate => self.plate_s,
            Stage::Gps => self.gps_s,
        }
    }

    /// Stages run side by side, so a frame takes as long as its slowest stage.
    pub fn frame_s(&self) -> f64 {
        self.face_s.max(self.plate_s).max(self.gps_s)
    }
}

/// One extracted artifact before it is persisted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub observation: Observation,
    pub bbox: Option<BBox>,
    pub crop: Option<Vec<u8>>,
}

impl Finding {
    pub fn into_detection(self, frame: &GeoFrame, worker_id: &str, detected_at_ms: u64, crop_blob: Option<BlobDigest>) -> Detection {
        Detection {
            detection_id: 0,
            observation: self.observation,
            fix: frame.fix(),
            source_frame: frame.frame_id(),
            crop_blob,
            worker_id: worker_id.to_string(),
            detected_at_ms,
        }
    }
}

/// Copies the frame's geotag into a GPS finding.
pub fn extract_gps(frame: &GeoFrame) -> Result<Finding, ExtractError> {
    if !frame.has_gps() {
        return Err(ExtractError::MissingFix);
    }
    Ok(Finding {
        observation: Observation::Gps,
        bbox: None,
        crop: None,
    })
}

pub fn extract_plates(frame: &GeoFrame, cfg: &ExtractConfig, counters: &mut ExtractCounters) -> Vec<Finding> {
    find_plates(frame, cfg, counters)
        .into_iter()
        .map(|p| Finding {
            observation: Observation::Plate(p.decoded),
            crop: cfg.crops.then(|| crop::png_crop(frame, &p.bbox)),
            bbox: Some(p.bbox),
        })
        .collect()
}

pub fn extract_faces(frame: &GeoFrame, cfg: &ExtractConfig, counters: &mut ExtractCounters) -> Vec<Finding> {
    find_faces(frame, cfg, counters)
        .into_iter()
        .map(|f| Finding {
            observation: Observation::Face(f.code),
            crop: cfg.crops.then(|| crop::png_crop(frame, &f.bbox)),
            bbox: Some(f.bbox),
        })
        .collect()
}

/// Output of one stage with its measured compute time.
#[derive(Debug, Clone)]
pub struct StageOutput {
    pub stage: Stage,
    pub findings: Vec<Finding>,
    pub counters: ExtractCounters,
    pub error: Option<ExtractError>,
    pub compute: Duration,
}

fn run_stage(stage: Stage, frame: &GeoFrame, cfg: &ExtractConfig) -> StageOutput {
    let start = Instant::now();
    let mut counters = ExtractCounters::default();
    let (findings, error) = match stage {
        Stage::Face => (extract_faces(frame, cfg, &mut counters), None),
        Stage::Plate => (extract_plates(frame, cfg, &mut counters), None),
        Stage::Gps => match extract_gps(frame) {
            Ok(f) => (vec![f], None),
            Err(e) => (vec![], Some(e)),
        },
    };
    StageOutput {
        stage,
        findings,
        counters,
        error,
        compute: start.elapsed(),
    }
}

/// Runs the face, plate and GPS stages, on scoped threads when `parallel`.
/// Results are returned in [`Stage::ALL`] order either way.
pub fn run_stages(frame: &GeoFrame, cfg: &ExtractConfig, parallel: bool) -> [StageOutput; 3] {
    if !parallel {
        return Stage::ALL.map(|s| run_stage(s, frame, cfg));
    }
    std::thread::scope(|scope| {
        let handles = Stage::ALL.map(|s| scope.spawn(move || run_stage(s, frame, cfg)));
        handles.map(|h| h.join().expect("extraction stage panicked"))
    })
}

#[cfg(test)]
mod tests;
