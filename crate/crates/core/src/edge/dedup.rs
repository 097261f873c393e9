use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::frame::GeoFrame;
use crate::geo::{haversine_m, GpsFix};

use super::phash::{hamming, phash};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DedupConfig {
    pub max_hash_distance: u32,
    pub max_distance_m: f64,
    pub max_dt_ms: u64,
    /// Window capacity per vehicle.
    pub window: usize,
}

impl Default for DedupConfig {
    fn default() -> Self {
        Self {
            max_hash_distance: 5,
            max_distance_m: 15.0,
            max_dt_ms: 10_000,
            window: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DedupDecision {
    pub duplicate: bool,
    /// Closest window entry by hash distance; all zero when the window was empty.
    pub matched_hash_distance: u32,
    pub matched_distance_m: f64,
    pub matched_dt_ms: u64,
}

#[derive(Debug, Clone, Copy)]
struct Seen {
    hash: u64,
    fix: GpsFix,
}

/// Per-vehicle ring buffers of recently seen frames.
#[derive(Debug, Clone, Default)]
pub struct DedupWindow {
    config: DedupConfig,
    windows: BTreeMap<u64, VecDeque<Seen>>,
}

impl DedupWindow {
    pub fn new(config: DedupConfig) -> Self {
        Self {
            config,
            windows: BTreeMap::new(),
        }
    }

    pub fn config(&self) -> &DedupConfig {
        &self.config
    }

    pub fn len(&self, vehicle_id: u64) -> usize {
        self.windows.get(&vehicle_id).map_or(0, VecDeque::len)
    }

    /// A frame is redundant when some earlier frame from the same vehicle is
    /// simultaneously close in hash, position and time. The frame is added to
    /// the window either way.
    pub fn check(&mut self, frame: &GeoFrame) -> DedupDecision {
        let cfg = self.config;
        let hash = phash(frame);
        let fix = frame.fix();
        let window = self.windows.entry(frame.vehicle_id()).or_default();
        let mut decision = DedupDecision {
            duplicate: false,
            matched_hash_distance: 0,
            matched_distance_m: 0.0,
            matched_dt_ms: 0,
        };
        let mut best: Option<(bool, u32, f64, u64)> = None;
        for seen in window.iter().rev() {
            let hd = hamming(hash, seen.hash);
            let dm = haversine_m(&fix, &seen.fix);
            let dt = fix.timestamp_ms.abs_diff(seen.fix.timestamp_ms);
            let dup = hd <= cfg.max_hash_distance && dm <= cfg.max_distance_m && dt <= cfg.max_dt_ms;
            let key = (dup, hd, dm, dt);
            // prefer a duplicate match, then the nearest hash
            if best.is_none_or(|b| (key.0 && !b.0) || (key.0 == b.0 && key.1 < b.1)) {
                best = Some(key);
            }
        }
        if let Some((dup, hd, dm, dt)) = best {
            decision = DedupDecision {
                duplicate: dup,
                matched_hash_distance: hd,
                matched_distance_m: dm,
                matched_dt_ms: dt,
            };
        }
        if cfg.window > 0 {
            if window.len() >= cfg.window {
                window.pop_front();
            }
            window.push_back(Seen { hash, fix });
        }
        decision
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GpsFix;
    use crate::model::Target;
    use crate::synthscene::{compose_frame, SceneItem, SceneSpec};

    fn spec(code: &str, x: u32) -> SceneSpec {
        SceneSpec::new(vec![SceneItem {
            target: Target::Plate(code.parse().unwrap()),
            origin_x: x,
            origin_y: 20,
            scale: 2,
        }])
    }

    fn frame_at(vehicle: u64, lat: f64, t_ms: u64, s: &SceneSpec) -> GeoFrame {
        compose_frame(s, GpsFix::from_degrees(lat, 2.3522, t_ms), vehicle, 177, 93, 0.0, 1).unwrap()
    }

    #[test]
    fn identical_resend_is_duplicate() {
        let mut w = DedupWindow::new(DedupConfig::default());
        let s = spec("AB123CD", 10);
        assert!(!w.check(&frame_at(1, 48.8566, 0, &s)).duplicate);
        let d = w.check(&frame_at(1, 48.8566, 1_000, &s));
        assert!(d.duplicate);
        assert_eq!((d.matched_hash_distance, d.matched_distance_m, d.matched_dt_ms), (0, 0.0, 1_000));
    }

    #[test]
    fn distance_gate() {
        let mut w = DedupWindow::new(DedupConfig::default());
        let s = spec("AB123CD", 10);
        w.check(&frame_at(1, 48.8566, 0, &s));
        // 0.0018 degrees of latitude is about 200 m
        let d = w.check(&frame_at(1, 48.8584, 1_000, &s));
        assert!(!d.duplicate);
        assert!((d.matched_distance_m - 200.0).abs() < 1.0);
    }

    #[test]
    fn time_gate() {
        let mut w = DedupWindow::new(DedupConfig::default());
        let s = spec("AB123CD", 10);
        w.check(&frame_at(1, 48.8566, 0, &s));
        assert!(!w.check(&frame_at(1, 48.8566, 11_000, &s)).duplicate);
        // the 11 s frame entered the window, so a resend one second later matches it
        assert!(w.check(&frame_at(1, 48.8566, 12_000, &s)).duplicate);
    }

    #[test]
    fn windows_are_per_vehicle_and_bounded() {
        let mut w = DedupWindow::new(DedupConfig {
            window: 3,
            ..Default::default()
        });
        let s = spec("AB123CD", 10);
        w.check(&frame_at(1, 48.8566, 0, &s));
        assert!(!w.check(&frame_at(2, 48.8566, 0, &s)).duplicate);
        for t in 1..10 {
            w.check(&frame_at(1, 48.8566, t * 100, &s));
        }
        assert_eq!(w.len(1), 3);
        assert_eq!(w.len(2), 1);
    }

    #[test]
    fn moved_scene_is_not_duplicate() {
        let mut w = DedupWindow::new(DedupConfig::default());
        w.check(&frame_at(1, 48.8566, 0, &spec("AB123CD", 5)));
        let d = w.check(&frame_at(1, 48.8566, 1_000, &spec("ZZ999ZZ", 80)));
        assert!(!d.duplicate);
        assert!(d.matched_hash_distance > 5);
    }
}
