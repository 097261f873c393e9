use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::edge::{DedupConfig, DispatchPolicy, OffloadPolicy};
use crate::extract::{ExtractConfig, ModeledTimes};
use crate::geo::GpsFix;
use crate::model::{FaceCode, PlateCode};
use crate::netsim::calibrate::{calibrate_table1_with, DEFAULT_BASE_LATENCY_S};
use crate::netsim::{ClockMode, LinkParams};
use crate::synthscene::{gen_trace, read_trace, Trace, TraceParams};

use super::HarnessError;

/// Link parameters; absent entries fall back to the Table-1 calibration at
/// `base_latency_s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkOverrides {
    pub base_latency_s: f64,
    pub vehicle_rsu: Option<LinkParams>,
    pub rsu_cloud: Option<LinkParams>,
}

impl Default for LinkOverrides {
    fn default() -> Self {
        Self {
            base_latency_s: DEFAULT_BASE_LATENCY_S,
            vehicle_rsu: None,
            rsu_cloud: None,
        }
    }
}

impl LinkOverrides {
    pub fn resolve(&self) -> (LinkParams, LinkParams) {
        let cal = calibrate_table1_with(self.base_latency_s);
        (self.vehicle_rsu.unwrap_or(cal.vehicle_rsu), self.rsu_cloud.unwrap_or(cal.rsu_cloud))
    }
}

/// Parameters for traces generated when no trace file is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceGen {
    pub steps: usize,
    pub step_ms: u64,
    pub speed_mps: f64,
    pub repeat_prob: f64,
    /// Explicit pools; when empty, `*_pool_size` random values are drawn.
    pub plates: Vec<PlateCode>,
    pub faces: Vec<FaceCode>,
    pub plate_pool_size: usize,
    pub face_pool_size: usize,
    pub max_items: usize,
    pub max_scale: u32,
    pub start_lat: f64,
    pub start_lon: f64,
    pub start_ms: u64,
}

impl Default for TraceGen {
    fn default() -> Self {
        let d = TraceParams::new(0, 1, vec![], vec![]);
        Self {
            steps: 10,
            step_ms: d.step_ms,
            speed_mps: d.speed_mps,
            repeat_prob: 0.0,
            plates: vec![],
            faces: vec![],
            plate_pool_size: 50,
            face_pool_size: 50,
            max_items: d.max_items,
            max_scale: d.max_scale,
            start_lat: d.start_fix.lat_deg(),
            start_lon: d.start_fix.lon_deg(),
            start_ms: d.start_fix.timestamp_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatchSeed {
    pub kind: String,
    pub value: serde_json::Value,
    #[serde(default)]
    pub label: String,
}

fn default_modeled() -> Option<ModeledTimes> {
    Some(ModeledTimes::TABLE1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub vehicles: usize,
    /// Per-vehicle trace files, in vehicle order. Vehicles without one get a
    /// generated trace.
    pub traces: Vec<PathBuf>,
    pub trace: TraceGen,
    pub rsus: usize,
    pub workers: usize,
    pub links: LinkOverrides,
    pub mode: ClockMode,
    pub seed: u64,
    pub offload: OffloadPolicy,
    pub local_extract_enabled: bool,
    pub dedup: DedupConfig,
    pub dispatch: DispatchPolicy,
    /// `null` disables modeling: zero cost in virtual mode, measured compute
    /// in realtime mode.
    #[serde(default = "default_modeled")]
    pub modeled_times: Option<ModeledTimes>,
    pub extract: ExtractConfig,
    pub web_workers: usize,
    pub t_face: u32,
    /// Virtual stop time; run to quiescence when absent.
    pub t_end_ms: Option<u64>,
    pub frame_width: u16,
    pub frame_height: u16,
    pub noise_level: f64,
    pub watchlist: Vec<WatchSeed>,
    pub listen: String,
    /// Realtime pacing: virtual seconds per wall second.
    pub time_scale: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            vehicles: 1,
            traces: vec![],
            trace: TraceGen::default(),
            rsus: 1,
            workers: 2,
            links: LinkOverrides::default(),
            mode: ClockMode::Virtual,
            seed: 0,
            offload: OffloadPolicy::AlwaysCentral,
            local_extract_enabled: false,
            dedup: DedupConfig::default(),
            dispatch: DispatchPolicy::RoundRobin,
            modeled_times: default_modeled(),
            extract: ExtractConfig::default(),
            web_workers: 2,
            t_face: 0,
            t_end_ms: None,
            frame_width: 177,
            frame_height: 93,
            noise_level: 0.0,
            watchlist: vec![],
            listen: "127.0.0.1:8080".into(),
            time_scale: 1.0,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::ConfigInvalid(e.to_string()))
    }

    /// Reads a config file; relative trace paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::ConfigInvalid(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for t in &mut cfg.traces {
            if t.is_relative() {
                *t = base.join(&*t);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::ConfigInvalid(m.into()));
        if self.vehicles == 0 {
            return bad("vehicles must be at least 1");
        }
        if self.traces.len() > self.vehicles {
            return bad("more trace files than vehicles");
        }
        if self.rsus != 1 {
            return bad("exactly one RSU is supported");
        }
        if self.workers == 0 {
            return bad("workers must be at least 1");
        }
        if self.web_workers == 0 {
            return bad("web_workers must be at least 1");
        }
        let (up, down) = self.links.resolve();
        if !(self.links.base_latency_s >= 0.0 && up.is_valid() && down.is_valid()) {
            return bad("invalid link parameters");
        }
        if let Some(m) = &self.modeled_times {
            if ![m.face_s, m.plate_s, m.gps_s].iter().all(|s| s.is_finite() && *s >= 0.0) {
                return bad("modeled times must be non-negative");
            }
        }
        if !(0.0..=1.0).contains(&self.noise_level) {
            return bad("noise_level must be within [0, 1]");
        }
        if self.frame_width == 0 || self.frame_height == 0 {
            return bad("frame dimensions must be positive");
        }
        if !(self.time_scale > 0.0 && self.time_scale.is_finite()) {
            return bad("time_scale must be positive");
        }
        if let OffloadPolicy::Adaptive { threshold_s } = self.offload {
            if !threshold_s.is_finite() {
                return bad("offload threshold must be finite");
            }
        }
        Ok(())
    }

    /// Plate and face pools for generated traces.
    pub fn pools(&self) -> (Vec<PlateCode>, Vec<FaceCode>) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x706f_6f6c);
        let plates = if self.trace.plates.is_empty() {
            const ALPHABET: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
            let mut v: Vec<PlateCode> = Vec::new();
            while v.len() < self.trace.plate_pool_size {
                let code: String = (0..7).map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())] as char).collect();
                let p = code.parse().expect("alphabet codes are valid");
                if !v.contains(&p) {
                    v.push(p);
                }
            }
            v
        } else {
            self.trace.plates.clone()
        };
        let faces = if self.trace.faces.is_empty() {
            let mut v: Vec<FaceCode> = Vec::new();
            while v.len() < self.trace.face_pool_size.min(4096) {
                let f = FaceCode::new(rng.random_range(0..4096)).expect("in range");
                if !v.contains(&f) {
                    v.push(f);
                }
            }
            v
        } else {
            self.trace.faces.clone()
        };
        (plates, faces)
    }

    /// One trace per vehicle: files first, generated traces for the rest.
    /// Generated vehicle `i` starts 0.01 degrees east of vehicle `i - 1`.
    pub fn load_traces(&self) -> Result<Vec<Trace>, HarnessError> {
        let mut out = Vec::with_capacity(self.vehicles);
        for path in &self.traces {
            let file = std::fs::File::open(path).map_err(|_| HarnessError::TraceNotFound(path.clone()))?;
            let t = read_trace(std::io::BufReader::new(file)).map_err(|e| HarnessError::ConfigInvalid(format!("{}: {e}", path.display())))?;
            out.push(t);
        }
        let (plates, faces) = self.pools();
        for i in out.len()..self.vehicles {
            let g = &self.trace;
            let mut p = TraceParams::new(self.seed.wrapping_add((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)), g.steps, plates.clone(), faces.clone());
            p.vehicle_id = i as u64;
            p.step_ms = g.step_ms;
            p.speed_mps = g.speed_mps;
            p.repeat_prob = g.repeat_prob;
            p.start_fix = GpsFix::from_degrees(g.start_lat, g.start_lon + 0.01 * i as f64, g.start_ms);
            p.frame_width = self.frame_width;
            p.frame_height = self.frame_height;
            p.max_items = g.max_items;
            p.max_scale = g.max_scale;
            out.push(gen_trace(&p).map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?);
        }
        let mut ids: Vec<u64> = out.iter().map(|t| t.vehicle_id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != out.len() {
            return Err(HarnessError::ConfigInvalid("vehicle ids are not distinct".into()));
        }
        Ok(out)
    }
}
