use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use super::GatewayError;

/// Round-robin request router over `W` web workers.
#[derive(Debug)]
pub struct LoadBalancer {
    cursor: AtomicUsize,
    counts: Vec<AtomicU64>,
}

impl LoadBalancer {
    pub fn new(workers: usize) -> Self {
        Self {
            cursor: AtomicUsize::new(0),
            counts: (0..workers).map(|_| AtomicU64::new(0)).collect(),
        }
    }

    pub fn workers(&self) -> usize {
        self.counts.len()
    }

    pub fn route(&self) -> Result<usize, GatewayError> {
        let w = self.counts.len();
        if w == 0 {
            return Err(GatewayError::NoWorkers);
        }
        let i = self.cursor.fetch_add(1, Ordering::Relaxed) % w;
        self.counts[i].fetch_add(1, Ordering::Relaxed);
        Ok(i)
    }

    pub fn counts(&self) -> Vec<u64> {
        self.counts.iter().map(|c| c.load(Ordering::Relaxed)).collect()
    }
}
