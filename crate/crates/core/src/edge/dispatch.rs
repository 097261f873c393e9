use serde::{Deserialize, Serialize};

use super::EdgeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispatchPolicy {
    #[default]
    RoundRobin,
    LeastLoaded,
}

/// Chooses a downlink for each admitted frame. In-flight counts are raised
/// on dispatch and lowered when the worker acknowledges.
#[derive(Debug, Clone)]
pub struct Dispatcher {
    policy: DispatchPolicy,
    rr_cursor: usize,
    in_flight: Vec<usize>,
    dispatched: Vec<u64>,
}

impl Dispatcher {
    pub fn new(policy: DispatchPolicy, workers: usize) -> Self {
        Self {
            policy,
            rr_cursor: 0,
            in_flight: vec![0; workers],
            dispatched: vec![0; workers],
        }
    }

    pub fn policy(&self) -> DispatchPolicy {
        self.policy
    }

    pub fn workers(&self) -> usize {
        self.in_flight.len()
    }

    pub fn rr_cursor(&self) -> usize {
        self.rr_cursor
    }

    pub fn in_flight(&self) -> &[usize] {
        &self.in_flight
    }

    pub fn dispatched(&self) -> &[u64] {
        &self.dispatched
    }

    /// Overrides the in-flight count of one worker.
    pub fn set_in_flight(&mut self, worker: usize, n: usize) {
        self.in_flight[worker] = n;
    }

    pub fn dispatch(&mut self) -> Result<usize, EdgeError> {
        let w = self.in_flight.len();
        if w == 0 {
            return Err(EdgeError::NoWorkers);
        }
        let chosen = match self.policy {
            DispatchPolicy::RoundRobin => {
                let c = self.rr_cursor;
                self.rr_cursor = (c + 1) % w;
                c
            }
            DispatchPolicy::LeastLoaded => (0..w).min_by_key(|&i| (self.in_flight[i], i)).unwrap(),
        };
        self.in_flight[chosen] += 1;
        self.dispatched[chosen] += 1;
        Ok(chosen)
    }

    pub fn ack(&mut self, worker: usize) {
        if let Some(n) = self.in_flight.get_mut(worker) {
            *n = n.saturating_sub(1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn round_robin_two() {
        let mut d = Dispatcher::new(DispatchPolicy::RoundRobin, 2);
        let picks: Vec<_> = (0..4).map(|_| d.dispatch().unwrap()).collect();
        assert_eq!(picks, [0, 1, 0, 1]);
    }

    #[test]
    fn round_robin_three_ten() {
        let mut d = Dispatcher::new(DispatchPolicy::RoundRobin, 3);
        for _ in 0..10 {
            d.dispatch().unwrap();
        }
        assert_eq!(d.dispatched(), [4, 3, 3]);
    }

    #[test]
    fn least_loaded_prefers_idle() {
        let mut d = Dispatcher::new(DispatchPolicy::LeastLoaded, 2);
        d.set_in_flight(0, 3);
        assert_eq!(d.dispatch().unwrap(), 1);
    }

    #[test]
    fn least_loaded_ties_to_lowest_and_acks() {
        let mut d = Dispatcher::new(DispatchPolicy::LeastLoaded, 3);
        assert_eq!(d.dispatch().unwrap(), 0);
        assert_eq!(d.dispatch().unwrap(), 1);
        d.ack(0);
        assert_eq!(d.dispatch().unwrap(), 0);
        assert_eq!(d.in_flight(), [1, 1, 0]);
    }

    #[test]
    fn no_workers() {
        for p in [DispatchPolicy::RoundRobin, DispatchPolicy::LeastLoaded] {
            assert!(matches!(Dispatcher::new(p, 0).dispatch(), Err(EdgeError::NoWorkers)));
        }
    }

    proptest! {
        #[test]
        fn round_robin_fair(w in 1usize..16, n in 0usize..500) {
            let mut d = Dispatcher::new(DispatchPolicy::RoundRobin, w);
            for _ in 0..n {
                d.dispatch().unwrap();
                prop_assert!(d.rr_cursor() < w);
            }
            let max = d.dispatched().iter().max().unwrap();
            let min = d.dispatched().iter().min().unwrap();
            prop_assert!(max - min <= 1);
            prop_assert_eq!(d.dispatched().iter().sum::<u64>(), n as u64);
        }
    }
}
