use serde::Serialize;

use crate::extract::{worker, ExtractConfig, ModeledTimes, Stage};
use crate::geo::GpsFix;
use crate::model::{FaceCode, Target};
use crate::netsim::calibrate::{TABLE1_FACE_S, TABLE1_PAYLOAD_BYTES, TABLE1_PLATE_S, TABLE1_RSU_CLOUD_S, TABLE1_VEHICLE_RSU_S};
use crate::netsim::{calibrate_table1, ClockMode, Handler, LinkParams, MessageKind, Network, Payload, SimEvent, SimTime, WireMessage};
use crate::synthscene::{compose_frame, SceneItem, SceneSpec};

use super::config::ScenarioConfig;
use super::metrics::Metric;
use super::world::run_scenario;
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub name: String,
    pub measured_s: f64,
    pub reference_s: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchTable {
    pub payload_bytes: usize,
    pub vehicle_rsu: LinkParams,
    pub rsu_cloud: LinkParams,
    pub rows: Vec<BenchRow>,
    /// Single-frame scenario latency with the same calibration.
    pub end_to_end_s: f64,
}

impl BenchTable {
    pub fn max_rel_error(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_error).fold(0.0, f64::max)
    }
}

fn row(name: &str, measured_s: f64, reference_s: f64) -> BenchRow {
    BenchRow {
        name: name.into(),
        measured_s,
        reference_s,
        rel_error: (measured_s - reference_s).abs() / reference_s,
    }
}

struct Deliveries(Vec<SimTime>);

impl Handler<()> for Deliveries {
    fn handle(&mut self, ev: SimEvent<()>, _: &mut Network<()>) {
        if let Payload::Deliver { sent_at, .. } = ev.payload {
            self.0.push(ev.due - sent_at);
        }
    }
}

/// Time for one message to cross an idle link with `params`.
fn link_transfer(params: LinkParams, msg: WireMessage) -> Result<f64, HarnessError> {
    let mut net: Network<()> = Network::new(ClockMode::Virtual, 0);
    let a = net.add_node("a");
    let b = net.add_node("b");
    let link = net.add_link("a->b", a, b, params)?;
    net.schedule_send(link, msg)?;
    let mut d = Deliveries(Vec::new());
    net.run_until(&mut d, SimTime(u64::MAX));
    Ok(d.0[0].as_secs_f64())
}

/// Reproduces the reference timing table from the calibrated model: a
/// 16 500-byte frame over each link, then through a worker.
pub fn bench_table1() -> Result<BenchTable, HarnessError> {
    let cal = calibrate_table1();
    let spec = SceneSpec::new(vec![
        SceneItem {
            target: Target::Plate("AB123CD".parse().expect("valid plate")),
            origin_x: 4,
            origin_y: 4,
            scale: 2,
        },
        SceneItem {
            target: Target::Face(FaceCode::new(2749).expect("valid face")),
            origin_x: 120,
            origin_y: 40,
            scale: 2,
        },
    ]);
    let frame = compose_frame(&spec, GpsFix::from_degrees(48.8566, 2.3522, 0), 0, 177, 93, 0.0, 0)?;
    let msg = WireMessage::new(MessageKind::FrameUpload, frame.encode());
    debug_assert_eq!(msg.wire_len(), TABLE1_PAYLOAD_BYTES);
    let up = link_transfer(cal.vehicle_rsu, msg.clone())?;
    let down = link_transfer(cal.rsu_cloud, msg.clone())?;

    let plan = worker::plan(frame, SimTime::ZERO, SimTime::ZERO, Some(&ModeledTimes::TABLE1), &ExtractConfig::default(), false);
    let stage_s = |s: Stage| {
        plan.stages
            .iter()
            .find(|p| p.stage() == s)
            .map_or(0.0, |p| (p.completes_at - plan.started_at).as_secs_f64())
    };

    let mut single = ScenarioConfig::default();
    single.trace.steps = 1;
    let e2e = run_scenario(&single)?.report.stage(Metric::EndToEnd).p50_s;

    Ok(BenchTable {
        payload_bytes: msg.wire_len(),
        vehicle_rsu: cal.vehicle_rsu,
        rsu_cloud: cal.rsu_cloud,
        rows: vec![
            row("vehicle_to_rsu", up, TABLE1_VEHICLE_RSU_S),
            row("rsu_to_cloud", down, TABLE1_RSU_CLOUD_S),
            row("face_extraction", stage_s(Stage::Face), TABLE1_FACE_S),
            row("plate_extraction", stage_s(Stage::Plate), TABLE1_PLATE_S),
        ],
        end_to_end_s: e2e,
    })
}
