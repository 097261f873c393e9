use crate::frame::GeoFrame;

use super::dedup::{DedupConfig, DedupDecision, DedupWindow};
use super::dispatch::{DispatchPolicy, Dispatcher};
use super::EdgeError;

/// Outcome of admitting one uploaded frame at the RSU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admission {
    Suppressed(DedupDecision),
    Forward { worker: usize, decision: DedupDecision },
}

#[derive(Debug, Clone)]
pub struct RsuNode {
    pub rsu_id: String,
    dedup: DedupWindow,
    dispatcher: Dispatcher,
    suppressed: u64,
}

impl RsuNode {
    pub fn new(rsu_id: impl Into<String>, dedup: DedupConfig, policy: DispatchPolicy, workers: usize) -> Self {
        Self {
            rsu_id: rsu_id.into(),
            dedup: DedupWindow::new(dedup),
            dispatcher: Dispatcher::new(policy, workers),
            suppressed: 0,
        }
    }

    pub fn dedup(&self) -> &DedupWindow {
        &self.dedup
    }

    pub fn dispatcher(&self) -> &Dispatcher {
        &self.dispatcher
    }

    pub fn suppressed(&self) -> u64 {
        self.suppressed
    }

    /// Dedup then dispatch.
    pub fn admit(&mut self, frame: &GeoFrame) -> Result<Admission, EdgeError> {
        let decision = self.dedup_check(frame);
        if decision.duplicate {
            return Ok(Admission::Suppressed(decision));
        }
        let worker = self.dispatch()?;
        Ok(Admission::Forward { worker, decision })
    }

    /// Runs the redundancy check alone, counting suppressions.
    pub fn dedup_check(&mut self, frame: &GeoFrame) -> DedupDecision {
        let decision = self.dedup.check(frame);
        if decision.duplicate {
            self.suppressed += 1;
        }
        decision
    }

    pub fn dispatch(&mut self) -> Result<usize, EdgeError> {
        self.dispatcher.dispatch()
    }

    pub fn ack(&mut self, worker: usize) {
        self.dispatcher.ack(worker);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GpsFix;
    use crate::synthscene::{compose_frame, SceneSpec};

    #[test]
    fn suppressed_frames_are_not_dispatched() {
        let mut rsu = RsuNode::new("rsu-0", DedupConfig::default(), DispatchPolicy::RoundRobin, 2);
        let spec = SceneSpec::new(vec![]);
        for t in 0..4 {
            let f = compose_frame(&spec, GpsFix::from_degrees(48.0, 2.0, t * 1000), 1, 40, 30, 0.0, 0).unwrap();
            let a = rsu.admit(&f).unwrap();
            assert_eq!(matches!(a, Admission::Forward { worker: 0, .. }), t == 0);
        }
        assert_eq!(rsu.suppressed(), 3);
        assert_eq!(rsu.dispatcher().dispatched(), [1, 0]);
    }
}
