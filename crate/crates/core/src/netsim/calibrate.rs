//! Link calibration against the reference transfer measurements: one
//! 16 500-byte image took 1.33 s from the vehicle to the RSU and 1.12 s from
//! the RSU to a cloud node.

use serde::Serialize;

use super::link::LinkParams;

pub const TABLE1_PAYLOAD_BYTES: usize = 16_500;
pub const TABLE1_VEHICLE_RSU_S: f64 = 1.33;
pub const TABLE1_RSU_CLOUD_S: f64 = 1.12;
pub const TABLE1_FACE_S: f64 = 1.08;
pub const TABLE1_PLATE_S: f64 = 3.29;

/// Fixed per-message latency; one measurement per link leaves only the
/// bandwidth free.
pub const DEFAULT_BASE_LATENCY_S: f64 = 0.05;

/// Bandwidth such that `payload_bytes` takes exactly `measured_s` end to end.
pub fn calibrate_link(payload_bytes: usize, measured_s: f64, base_latency_s: f64) -> LinkParams {
    assert!(measured_s > base_latency_s, "measurement must exceed the fixed latency");
    LinkParams {
        base_latency_s,
        bandwidth_bps: payload_bytes as f64 / (measured_s - base_latency_s),
        loss_prob: 0.0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub vehicle_rsu: LinkParams,
    pub rsu_cloud: LinkParams,
}

pub fn calibrate_table1() -> Calibration {
    calibrate_table1_with(DEFAULT_BASE_LATENCY_S)
}

pub fn calibrate_table1_with(base_latency_s: f64) -> Calibration {
    Calibration {
        vehicle_rsu: calibrate_link(TABLE1_PAYLOAD_BYTES, TABLE1_VEHICLE_RSU_S, base_latency_s),
        rsu_cloud: calibrate_link(TABLE1_PAYLOAD_BYTES, TABLE1_RSU_CLOUD_S, base_latency_s),
    }
}
