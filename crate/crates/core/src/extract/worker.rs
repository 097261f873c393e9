use std::collections::VecDeque;

use crate::frame::GeoFrame;
use crate::netsim::SimTime;

use super::{run_stages, ExtractConfig, ExtractCounters, ModeledTimes, Stage, StageOutput};

#[derive(Debug, Clone)]
pub struct StagePlan {
    pub output: StageOutput,
    pub completes_at: SimTime,
}

impl StagePlan {
    pub fn stage(&self) -> Stage {
        self.output.stage
    }
}

/// When each stage of one frame finishes.
#[derive(Debug, Clone)]
pub struct ProcessPlan {
    pub frame: GeoFrame,
    pub arrival: SimTime,
    pub started_at: SimTime,
    pub stages: [StagePlan; 3],
}

impl ProcessPlan {
    /// The frame is done when its slowest stage is.
    pub fn completes_at(&self) -> SimTime {
        self.stages.iter().map(|s| s.completes_at).max().unwrap_or(self.started_at)
    }
}

/// Runs the extractors on `frame` starting at `start` and stamps each
/// stage's completion time.
///
/// With `modeled` set, a stage completes `modeled.stage_s(stage)` after the
/// start. Otherwise it completes after its measured compute time when
/// `measured` is true (realtime runs) or immediately (virtual runs).
pub fn plan(frame: GeoFrame, arrival: SimTime, start: SimTime, modeled: Option<&ModeledTimes>, cfg: &ExtractConfig, measured: bool) -> ProcessPlan {
    let outputs = run_stages(&frame, cfg, measured);
    let stages = outputs.map(|output| {
        let cost = match modeled {
            Some(m) => SimTime::from_secs_f64(m.stage_s(output.stage)),
            None if measured => SimTime(output.compute.as_nanos() as u64),
            None => SimTime::ZERO,
        };
        StagePlan {
            completes_at: start + cost,
            output,
        }
    });
    ProcessPlan {
        frame,
        arrival,
        started_at: start,
        stages,
    }
}

/// A cloud worker: takes frames in arrival order, one at a time.
#[derive(Debug)]
pub struct WorkerNode {
    pub worker_id: String,
    pub modeled_times: Option<ModeledTimes>,
    pub config: ExtractConfig,
    queue: VecDeque<(GeoFrame, SimTime)>,
    busy: bool,
    pub processed: u64,
    pub counters: ExtractCounters,
}

impl WorkerNode {
    pub fn new(worker_id: impl Into<String>, modeled_times: Option<ModeledTimes>, config: ExtractConfig) -> Self {
        Self {
            worker_id: worker_id.into(),
            modeled_times,
            config,
            queue: VecDeque::new(),
            busy: false,
            processed: 0,
            counters: ExtractCounters::default(),
        }
    }

    pub fn enqueue(&mut self, frame: GeoFrame, arrival: SimTime) {
        self.queue.push_back((frame, arrival));
    }

    pub fn is_busy(&self) -> bool {
        self.busy
    }

    pub fn queued(&self) -> usize {
        self.queue.len()
    }

    /// Starts the oldest queued frame at `now` if the worker is idle.
    pub fn start_next(&mut self, now: SimTime, measured: bool) -> Option<ProcessPlan> {
        if self.busy {
            return None;
        }
        let (frame, arrival) = self.queue.pop_front()?;
        self.busy = true;
        let p = plan(frame, arrival, now, self.modeled_times.as_ref(), &self.config, measured);
        for s in &p.stages {
            self.counters.absorb(&s.output.counters);
        }
        Some(p)
    }

    /// Marks the current frame finished.
    pub fn finish(&mut self) {
        debug_assert!(self.busy);
        self.busy = false;
        self.processed += 1;
    }
}
