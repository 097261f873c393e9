use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::extract::ExtractCounters;
use crate::netsim::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    UploadV2i,
    Dedup,
    Dispatch,
    TransferRsuCloud,
    ExtractFace,
    ExtractPlate,
    ExtractGps,
    Persist,
    Match,
    EndToEnd,
}

impl Metric {
    pub const ALL: [Metric; 10] = [
        Metric::UploadV2i,
        Metric::Dedup,
        Metric::Dispatch,
        Metric::TransferRsuCloud,
        Metric::ExtractFace,
        Metric::ExtractPlate,
        Metric::ExtractGps,
        Metric::Persist,
        Metric::Match,
        Metric::EndToEnd,
    ];
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub count: u64,
    pub mean_s: f64,
    pub p50_s: f64,
    pub p95_s: f64,
}

/// Nearest-rank percentile of ascending `sorted`: the value at rank
/// `ceil(p/100 * n)`.
pub fn nearest_rank(sorted: &[u64], p: f64) -> u64 {
    assert!(!sorted.is_empty() && (0.0..=100.0).contains(&p));
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

impl StageStats {
    pub fn from_samples(samples: &[SimTime]) -> Self {
        if samples.is_empty() {
            return Self::default();
        }
        let mut ns: Vec<u64> = samples.iter().map(|s| s.as_nanos()).collect();
        ns.sort_unstable();
        let sum: u128 = ns.iter().map(|&v| v as u128).sum();
        Self {
            count: ns.len() as u64,
            mean_s: sum as f64 / ns.len() as f64 / 1e9,
            p50_s: nearest_rank(&ns, 50.0) as f64 / 1e9,
            p95_s: nearest_rank(&ns, 95.0) as f64 / 1e9,
        }
    }
}

/// Sample sink for per-stage durations.
#[derive(Debug, Clone, Default)]
pub struct Samples(BTreeMap<Metric, Vec<SimTime>>);

impl Samples {
    pub fn record(&mut self, m: Metric, d: SimTime) {
        self.0.entry(m).or_default().push(d);
    }

    pub fn get(&self, m: Metric) -> &[SimTime] {
        self.0.get(&m).map_or(&[], Vec::as_slice)
    }

    pub fn stats(&self) -> BTreeMap<Metric, StageStats> {
        Metric::ALL.iter().map(|&m| (m, StageStats::from_samples(self.get(m)))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub stages: BTreeMap<Metric, StageStats>,
    pub frames_captured: u64,
    pub frames_offloaded_local: u64,
    pub dedup_suppressed: u64,
    pub drops: u64,
    pub frames_processed: u64,
    pub detections: u64,
    pub matches: u64,
    /// Frames each cloud worker processed, by worker index.
    pub worker_frames: Vec<u64>,
    pub bytes_sent: BTreeMap<String, u64>,
    pub extract: ExtractCounters,
    pub errors: Vec<String>,
    pub virtual_end_s: f64,
    pub event_log_digest: String,
}

impl MetricsReport {
    pub fn stage(&self, m: Metric) -> StageStats {
        self.stages.get(&m).copied().unwrap_or_default()
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
