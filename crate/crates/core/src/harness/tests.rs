use std::collections::BTreeSet;

use serde_json::json;

use super::*;
use crate::edge::{DispatchPolicy, OffloadPolicy};
use crate::model::DetectionKind;
use crate::netsim::LinkParams;

fn single(steps: usize) -> ScenarioConfig {
    let mut c = ScenarioConfig::default();
    c.trace.steps = steps;
    c
}

fn conserved(out: &ScenarioOutput) {
    let r = &out.report;
    let sources: BTreeSet<_> = out.stores().detections.all().iter().map(|d| d.source_frame).collect();
    assert_eq!(r.frames_captured, r.dedup_suppressed + r.drops + sources.len() as u64, "{r:#?}");
    assert!(r.stage(Metric::EndToEnd).count <= r.frames_captured);
}

#[test]
fn single_frame_end_to_end() {
    let out = run_scenario(&single(1)).unwrap();
    let r = &out.report;
    assert_eq!(r.frames_captured, 1);
    let e2e = r.stage(Metric::EndToEnd);
    assert_eq!(e2e.count, 1);
    assert!((e2e.p50_s - 5.74).abs() < 1e-9, "{}", e2e.p50_s);
    assert!((r.stage(Metric::UploadV2i).p50_s - 1.33).abs() < 1e-9);
    assert!((r.stage(Metric::TransferRsuCloud).p50_s - 1.12).abs() < 1e-9);
    assert!((r.stage(Metric::ExtractPlate).p50_s - 3.29).abs() < 1e-9);
    assert!((r.stage(Metric::ExtractFace).p50_s - 1.08).abs() < 1e-9);
    // the log shows the two transfers
    let deliveries: Vec<u64> = out.log.iter().filter(|e| e.what.starts_with("deliver") && e.what.contains("FrameUpload")).map(|e| e.due_ns).collect();
    assert_eq!(deliveries, [1_330_000_000, 2_450_000_000]);
    assert!(r.errors.is_empty());
    conserved(&out);
}

#[test]
fn stage_persistence_times() {
    let out = run_scenario(&single(1)).unwrap();
    let ds = out.stores().detections.all();
    let epoch = out.traces[0].steps[0].t_ms;
    for d in &ds {
        let dt = d.detected_at_ms - epoch;
        match d.kind() {
            DetectionKind::Gps => assert_eq!(dt, 2_460),
            DetectionKind::Face => assert_eq!(dt, 3_530),
            DetectionKind::Plate => assert_eq!(dt, 5_740),
        }
    }
    assert!(ds.iter().any(|d| d.kind() == DetectionKind::Gps));
}

#[test]
fn forced_repeats_suppressed() {
    let mut c = single(10);
    c.trace.repeat_prob = 1.0;
    let out = run_scenario(&c).unwrap();
    assert_eq!(out.report.dedup_suppressed, 9);
    assert_eq!(out.report.frames_processed, 1);
    conserved(&out);
}

#[test]
fn repeat_free_not_suppressed() {
    for seed in 0..5 {
        let mut c = single(50);
        c.seed = seed;
        let out = run_scenario(&c).unwrap();
        assert_eq!(out.report.dedup_suppressed, 0);
        conserved(&out);
    }
}

#[test]
fn round_robin_distribution() {
    let mut c = single(100);
    c.modeled_times = None;
    let out = run_scenario(&c).unwrap();
    assert_eq!(out.report.worker_frames, [50, 50]);
    c.workers = 3;
    let w = run_scenario(&c).unwrap().report.worker_frames;
    assert_eq!(w.iter().sum::<u64>(), 100);
    assert!(w.iter().max().unwrap() - w.iter().min().unwrap() <= 1);
}

#[test]
fn least_loaded_uses_acks() {
    let mut c = single(40);
    c.dispatch = DispatchPolicy::LeastLoaded;
    c.workers = 3;
    let out = run_scenario(&c).unwrap();
    assert_eq!(out.report.frames_processed, 40);
    assert!(out.report.worker_frames.iter().all(|&n| n > 0));
    conserved(&out);
}

#[test]
fn deterministic_reports() {
    let mut c = single(30);
    c.vehicles = 2;
    c.seed = 7;
    c.noise_level = 0.01;
    let a = run_scenario(&c).unwrap();
    let b = run_scenario(&c).unwrap();
    assert_eq!(a.report.to_json_pretty(), b.report.to_json_pretty());
    assert_eq!(a.log, b.log);
    c.seed = 8;
    let d = run_scenario(&c).unwrap();
    assert_ne!(a.report.event_log_digest, d.report.event_log_digest);
}

#[test]
fn local_offload_saves_bytes() {
    let mut c = single(5);
    c.offload = OffloadPolicy::AlwaysLocal;
    c.local_extract_enabled = true;
    let local = run_scenario(&c).unwrap();
    assert_eq!(local.report.frames_offloaded_local, 5);
    assert_eq!(local.report.frames_processed, 0);
    assert_eq!(local.report.stage(Metric::EndToEnd).count, 5);
    conserved(&local);
    let central = run_scenario(&single(5)).unwrap();
    let up = |o: &ScenarioOutput| o.report.bytes_sent["vehicle-0->rsu-0"];
    assert!(up(&local) * 10 < up(&central), "{} vs {}", up(&local), up(&central));
    // same plates and faces either way
    let values = |o: &ScenarioOutput| -> BTreeSet<String> {
        o.stores()
            .detections
            .all()
            .iter()
            .filter(|d| d.kind() != DetectionKind::Gps)
            .map(|d| serde_json::to_string(&d.observation).unwrap())
            .collect()
    };
    assert_eq!(values(&local), values(&central));
}

#[test]
fn adaptive_offload_threshold() {
    let mut c = single(3);
    c.local_extract_enabled = true;
    c.offload = OffloadPolicy::Adaptive { threshold_s: 1.0 };
    assert_eq!(run_scenario(&c).unwrap().report.frames_offloaded_local, 3);
    c.offload = OffloadPolicy::Adaptive { threshold_s: 2.0 };
    assert_eq!(run_scenario(&c).unwrap().report.frames_offloaded_local, 0);
}

#[test]
fn lossy_links_conserve() {
    for local in [false, true] {
        let mut c = single(40);
        c.seed = 3;
        c.local_extract_enabled = local;
        if local {
            c.offload = OffloadPolicy::AlwaysLocal;
        }
        let mut p = c.links.resolve();
        p.0.loss_prob = 0.3;
        p.1.loss_prob = 0.2;
        c.links.vehicle_rsu = Some(p.0);
        c.links.rsu_cloud = Some(p.1);
        let out = run_scenario(&c).unwrap();
        assert!(out.report.drops > 0);
        conserved(&out);
    }
}

#[test]
fn matches_against_seeded_watchlist() {
    let mut c = single(20);
    let probe = run_scenario(&c).unwrap();
    let plate = probe
        .stores()
        .detections
        .all()
        .into_iter()
        .find_map(|d| match d.observation {
            crate::model::Observation::Plate(p) => Some(p),
            _ => None,
        })
        .expect("some plate in 20 steps");
    c.watchlist = vec![WatchSeed {
        kind: "plate".into(),
        value: json!(plate.as_str()),
        label: "x".into(),
    }];
    let out = run_scenario(&c).unwrap();
    let expected = out.stores().detections.all().iter().filter(|d| d.observation == crate::model::Observation::Plate(plate)).count();
    assert!(expected > 0);
    assert_eq!(out.gateway.hub.len(), expected);
    assert_eq!(out.report.matches, expected as u64);
}

#[test]
fn crops_are_stored() {
    let out = run_scenario(&single(3)).unwrap();
    for d in out.stores().detections.all() {
        match d.kind() {
            DetectionKind::Gps => assert!(d.crop_blob.is_none()),
            _ => assert!(out.stores().blobs.get_blob(d.crop_blob.unwrap()).unwrap().starts_with(b"\x89PNG")),
        }
    }
}

#[test]
fn t_end_cuts_run() {
    let mut c = single(10);
    c.t_end_ms = Some(3_000);
    let out = run_scenario(&c).unwrap();
    assert_eq!(out.report.frames_captured, 4);
    assert!(out.log.iter().all(|e| e.due_ns <= 3_000_000_000));
}

#[test]
fn config_errors() {
    let bad = |f: fn(&mut ScenarioConfig)| {
        let mut c = ScenarioConfig::default();
        f(&mut c);
        matches!(run_scenario(&c), Err(HarnessError::ConfigInvalid(_)))
    };
    assert!(bad(|c| c.workers = 0));
    assert!(bad(|c| c.vehicles = 0));
    assert!(bad(|c| c.rsus = 2));
    assert!(bad(|c| c.web_workers = 0));
    assert!(bad(|c| c.noise_level = 2.0));
    assert!(bad(|c| c.trace.steps = 0));
    assert!(bad(|c| {
        c.links.vehicle_rsu = Some(LinkParams {
            base_latency_s: 0.0,
            bandwidth_bps: -1.0,
            loss_prob: 0.0,
        })
    }));
    assert!(bad(|c| c.watchlist = vec![WatchSeed { kind: "face".into(), value: json!(9999), label: String::new() }]));
    let c = ScenarioConfig {
        traces: vec!["/nonexistent/trace.jsonl".into()],
        ..Default::default()
    };
    assert!(matches!(run_scenario(&c), Err(HarnessError::TraceNotFound(_))));
    assert!(matches!(ScenarioConfig::from_json(r#"{"vehicles": 1, "bogus": 2}"#), Err(HarnessError::ConfigInvalid(_))));
}

#[test]
fn config_json_defaults() {
    let c = ScenarioConfig::from_json(r#"{"vehicles": 3, "seed": 42, "offload": {"policy": "adaptive", "threshold_s": 1.5}, "modeled_times": null}"#).unwrap();
    assert_eq!(c.workers, 2);
    assert_eq!(c.web_workers, 2);
    assert_eq!(c.modeled_times, None);
    assert_eq!(c.offload, OffloadPolicy::Adaptive { threshold_s: 1.5 });
    assert_eq!(ScenarioConfig::from_json("{}").unwrap(), ScenarioConfig::default());
}

#[test]
fn trace_files_resolve_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    let args = TraceCmd {
        steps: 4,
        seed: 1,
        plates: None,
        faces: None,
        repeat_prob: 0.0,
        out: dir.path().join("v0.jsonl"),
        vehicle_id: 9,
    };
    gen_trace_cmd(&args).unwrap();
    std::fs::write(dir.path().join("s.json"), r#"{"traces": ["v0.jsonl"]}"#).unwrap();
    let c = ScenarioConfig::load(&dir.path().join("s.json")).unwrap();
    let out = run_scenario(&c).unwrap();
    assert_eq!(out.traces[0].vehicle_id, 9);
    assert_eq!(out.report.frames_captured, 4);
}

#[test]
fn trace_cmd() {
    let dir = tempfile::tempdir().unwrap();
    let plates = dir.path().join("plates.txt");
    std::fs::write(&plates, "# pool\nAB123CD\n\nZZ999ZZ\n").unwrap();
    let faces = dir.path().join("faces.txt");
    std::fs::write(&faces, "7\n4095\n").unwrap();
    let mk = |out: &str, steps, rp| TraceCmd {
        steps,
        seed: 42,
        plates: Some(plates.clone()),
        faces: Some(faces.clone()),
        repeat_prob: rp,
        out: dir.path().join(out),
        vehicle_id: 0,
    };
    gen_trace_cmd(&mk("one.jsonl", 1, 0.0)).unwrap();
    assert_eq!(std::fs::read_to_string(dir.path().join("one.jsonl")).unwrap().lines().count(), 2);
    gen_trace_cmd(&mk("a.jsonl", 20, 0.3)).unwrap();
    gen_trace_cmd(&mk("b.jsonl", 20, 0.3)).unwrap();
    assert_eq!(std::fs::read(dir.path().join("a.jsonl")).unwrap(), std::fs::read(dir.path().join("b.jsonl")).unwrap());
    gen_trace_cmd(&mk("r.jsonl", 5, 1.0)).unwrap();
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(dir.path().join("r.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert!(lines[2..].iter().all(|l| l["items"] == lines[1]["items"]));

    std::fs::write(&faces, "5000\n").unwrap();
    assert!(matches!(gen_trace_cmd(&mk("x.jsonl", 3, 0.0)), Err(HarnessError::BadArgs(_))));
    assert!(matches!(gen_trace_cmd(&mk("x.jsonl", 0, 0.0)), Err(HarnessError::BadArgs(_))));
    assert!(matches!(gen_trace_cmd(&mk("x.jsonl", 3, 1.5)), Err(HarnessError::BadArgs(_))));
}

#[test]
fn bench_matches_reference() {
    let t = bench_table1().unwrap();
    assert_eq!(t.payload_bytes, 16_500);
    assert_eq!(t.rows.len(), 4);
    assert!(t.max_rel_error() < 1e-9, "{t:#?}");
    assert!((t.end_to_end_s - 5.74).abs() < 1e-9);
}

#[test]
fn realtime_mode_runs() {
    let mut c = single(2);
    c.mode = crate::netsim::ClockMode::Realtime;
    c.time_scale = 50.0;
    let t = std::time::Instant::now();
    let out = run_scenario(&c).unwrap();
    assert_eq!(out.report.frames_processed, 2);
    // 1 s between captures plus 5.74 s of pipeline at 50x
    assert!(t.elapsed() >= std::time::Duration::from_millis(100));
    assert!(out.gateway.metrics()["frames_processed"] == 2);
}
