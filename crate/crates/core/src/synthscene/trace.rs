//! Synthetic driving traces and the `vctrace/1` JSON Lines format.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::frame::fnv1a64;
use crate::geo::GpsFix;
use crate::model::{FaceCode, PlateCode, Target};

use super::render;
use super::scene::{SceneItem, SceneSpec};
use super::SceneError;

pub const TRACE_FORMAT: &str = "vctrace/1";

/// Meters per degree of latitude on the reference sphere.
pub const METERS_PER_DEG_LAT: f64 = 111_194.9;

const PLACEMENT_ATTEMPTS: usize = 64;
/// Minimum clearance kept between generated items, in pixels.
const ITEM_GAP: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub t_ms: u64,
    pub fix: GpsFix,
    pub scene: SceneSpec,
}

impl TraceStep {
    /// Noise seed for rendering this step. Depends only on the step's
    /// content, so a verbatim repeat renders to identical pixels.
    pub fn noise_seed(&self, base_seed: u64, vehicle_id: u64) -> u64 {
        let mut key = Vec::with_capacity(64);
        key.extend_from_slice(&base_seed.to_le_bytes());
        key.extend_from_slice(&vehicle_id.to_le_bytes());
        key.extend_from_slice(&self.fix.lat_e7.to_le_bytes());
        key.extend_from_slice(&self.fix.lon_e7.to_le_bytes());
        key.extend_from_slice(serde_json::to_string(&self.scene).unwrap().as_bytes());
        fnv1a64(&key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub vehicle_id: u64,
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceParams {
    pub seed: u64,
    pub vehicle_id: u64,
    pub n_steps: usize,
    pub step_ms: u64,
    pub start_fix: GpsFix,
    pub speed_mps: f64,
    pub plate_pool: Vec<PlateCode>,
    pub face_pool: Vec<FaceCode>,
    pub repeat_prob: f64,
    /// Frame size the generated scenes must fit in.
    pub frame_width: u16,
    pub frame_height: u16,
    pub max_items: usize,
    pub max_scale: u32,
}

impl TraceParams {
    pub fn new(seed: u64, n_steps: usize, plate_pool: Vec<PlateCode>, face_pool: Vec<FaceCode>) -> Self {
        Self {
            seed,
            vehicle_id: 0,
            n_steps,
            step_ms: 1_000,
            start_fix: GpsFix::from_degrees(48.8566, 2.3522, 1_700_000_000_000),
            speed_mps: 16.7,
            plate_pool,
            face_pool,
            repeat_prob: 0.0,
            frame_width: 177,
            frame_height: 93,
            max_items: 2,
            max_scale: 2,
        }
    }
}

/// Generates a straight northward trace. Each step either repeats the
/// previous step's scene and position (with probability `repeat_prob`) or
/// advances `speed_mps * step_ms / 1000` meters and draws a fresh scene.
pub fn gen_trace(p: &TraceParams) -> Result<Trace, SceneError> {
    if p.n_steps == 0 {
        return Err(SceneError::BadParams("n_steps must be at least 1".into()));
    }
    if p.plate_pool.is_empty() && p.face_pool.is_empty() {
        return Err(SceneError::BadParams("plate and face pools are both empty".into()));
    }
    if !(0.0..=1.0).contains(&p.repeat_prob) {
        return Err(SceneError::BadParams(format!("repeat_prob {} outside [0, 1]", p.repeat_prob)));
    }
    if p.max_scale == 0 || p.step_ms == 0 {
        return Err(SceneError::BadParams("max_scale and step_ms must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let step_m = p.speed_mps * p.step_ms as f64 / 1000.0;
    let mut advances = 0u64;
    let mut steps: Vec<TraceStep> = Vec::with_capacity(p.n_steps);
    for i in 0..p.n_steps {
        let t_ms = p.start_fix.timestamp_ms + i as u64 * p.step_ms;
        let repeat = i > 0 && rng.random_bool(p.repeat_prob);
        let step = match steps.last() {
            Some(prev) if repeat => TraceStep {
                t_ms,
                fix: prev.fix.with_timestamp(t_ms),
                scene: prev.scene.clone(),
            },
            _ => {
                if i > 0 {
                    advances += 1;
                }
                let dlat = (advances as f64 * step_m / METERS_PER_DEG_LAT * 1e7).round() as i64;
                let lat = (p.start_fix.lat_e7 as i64 + dlat).clamp(-900_000_000, 900_000_000) as i32;
                TraceStep {
                    t_ms,
                    fix: GpsFix::new(lat, p.start_fix.lon_e7, t_ms),
                    scene: random_scene(&mut rng, p),
                }
            }
        };
        steps.push(step);
    }
    Ok(Trace {
        vehicle_id: p.vehicle_id,
        steps,
    })
}

fn random_scene(rng: &mut ChaCha8Rng, p: &TraceParams) -> SceneSpec {
    let (fw, fh) = (p.frame_width as usize, p.frame_height as usize);
    let count = rng.random_range(1..=p.max_items.max(1));
    let mut items: Vec<SceneItem> = Vec::with_capacity(count);
    for _ in 0..count {
        let plate = if p.face_pool.is_empty() {
            true
        } else if p.plate_pool.is_empty() {
            false
        } else {
            rng.random_bool(0.5)
        };
        let target = if plate {
            Target::Plate(p.plate_pool[rng.random_range(0..p.plate_pool.len())])
        } else {
            Target::Face(p.face_pool[rng.random_range(0..p.face_pool.len())])
        };
        let scale = rng.random_range(1..=p.max_scale);
        let (w, h) = match target {
            Target::Plate(_) => render::plate_size(scale as usize),
            Target::Face(_) => render::face_size(scale as usize),
        };
        if w > fw || h > fh {
            continue;
        }
        for _ in 0..PLACEMENT_ATTEMPTS {
            let x = rng.random_range(0..=fw - w);
            let y = rng.random_range(0..=fh - h);
            let clear = items.iter().all(|o| {
                let (ox, oy, ow, oh) = o.bbox();
                x + w + ITEM_GAP <= ox || ox + ow + ITEM_GAP <= x || y + h + ITEM_GAP <= oy || oy + oh + ITEM_GAP <= y
            });
            if clear {
                items.push(SceneItem {
                    target,
                    origin_x: x as u32,
                    origin_y: y as u32,
                    scale,
                });
                break;
            }
        }
    }
    SceneSpec::new(items)
}

#[derive(Serialize, Deserialize)]
struct Header {
    vehicle_id: u64,
    format: String,
}

#[derive(Serialize, Deserialize)]
struct StepLine {
    t_ms: u64,
    lat_e7: i32,
    lon_e7: i32,
    items: Vec<SceneItem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    background: Option<u8>,
}

pub fn write_trace<W: Write>(trace: &Trace, mut out: W) -> Result<(), SceneError> {
    let header = Header {
        vehicle_id: trace.vehicle_id,
        format: TRACE_FORMAT.to_string(),
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    for s in &trace.steps {
        let line = StepLine {
            t_ms: s.t_ms,
            lat_e7: s.fix.lat_e7,
            lon_e7: s.fix.lon_e7,
            items: s.scene.items.clone(),
            background: (s.scene.background != super::scene::DEFAULT_BACKGROUND).then_some(s.scene.background),
        };
        writeln!(out, "{}", serde_json::to_string(&line)?)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Trace, SceneError> {
    let mut lines = input.lines().enumerate().filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
    let (_, first) = lines.next().ok_or_else(|| SceneError::BadTrace { line: 1, reason: "empty file".into() })?;
    let header: Header = serde_json::from_str(&first?).map_err(|e| SceneError::BadTrace {
        line: 1,
        reason: e.to_string(),
    })?;
    if header.format != TRACE_FORMAT {
        return Err(SceneError::BadTrace {
            line: 1,
            reason: format!("unsupported format {:?}", header.format),
        });
    }
    let mut steps: Vec<TraceStep> = Vec::new();
    for (i, line) in lines {
        let bad = |reason: String| SceneError::BadTrace { line: i + 1, reason };
        let s: StepLine = serde_json::from_str(&line?).map_err(|e| bad(e.to_string()))?;
        if steps.last().is_some_and(|p| p.t_ms >= s.t_ms) {
            return Err(bad("t_ms must be strictly increasing".into()));
        }
        let fix = GpsFix::new(s.lat_e7, s.lon_e7, s.t_ms);
        if !fix.is_valid() {
            return Err(bad("coordinates out of range".into()));
        }
        steps.push(TraceStep {
            t_ms: s.t_ms,
            fix,
            scene: SceneSpec {
                items: s.items,
                background: s.background.unwrap_or(super::scene::DEFAULT_BACKGROUND),
            },
        });
    }
    Ok(Trace {
        vehicle_id: header.vehicle_id,
        steps,
    })
}
