//! Scenario orchestration: config, the simulated world, metrics, the
//! calibration bench and trace generation.

pub mod bench;
pub mod config;
pub mod metrics;
pub mod tracegen;
pub mod world;

use std::path::PathBuf;

use thiserror::Error;

pub use bench::{bench_table1, BenchRow, BenchTable};
pub use config::{LinkOverrides, ScenarioConfig, TraceGen, WatchSeed};
pub use metrics::{nearest_rank, Metric, MetricsReport, StageStats};
pub use tracegen::{gen_trace_cmd, TraceCmd};
pub use world::{run_scenario, run_scenario_with, RunHooks, ScenarioOutput};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("trace not found: {}", .0.display())]
    TraceNotFound(PathBuf),
    #[error("bad arguments: {0}")]
    BadArgs(String),
    #[error(transparent)]
    Net(#[from] crate::netsim::NetError),
    #[error(transparent)]
    Scene(#[from] crate::synthscene::SceneError),
    #[error(transparent)]
    Store(#[from] crate::store::StoreError),
}

impl HarnessError {
    /// Config problems are the caller's to fix; everything else is a
    /// runtime failure.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Self::ConfigInvalid(_) | Self::TraceNotFound(_) | Self::BadArgs(_))
    }
}

#[cfg(test)]
mod tests;
