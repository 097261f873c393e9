use proptest::prelude::*;
use serde_json::json;

use super::*;
use crate::frame::FrameId;
use crate::geo::GpsFix;
use crate::model::{Detection, DetectionKind, FaceCode, Observation, Target};

fn det(obs: Observation, lat_e7: i32, lon_e7: i32, at: u64) -> Detection {
    Detection {
        detection_id: 0,
        observation: obs,
        fix: GpsFix::new(lat_e7, lon_e7, at),
        source_frame: FrameId(at),
        crop_blob: None,
        worker_id: "w0".into(),
        detected_at_ms: at,
    }
}

fn plate(s: &str) -> Observation {
    Observation::Plate(s.parse().unwrap())
}

#[test]
fn ids_are_sequential() {
    let s = DetectionStore::new();
    for i in 1..=100u64 {
        assert_eq!(s.put_detection(det(Observation::Gps, 0, 0, i)), i);
    }
    let ids: Vec<u64> = s.all().iter().map(|d| d.detection_id).collect();
    assert_eq!(ids, (1..=100).collect::<Vec<_>>());
}

#[test]
fn query_by_plate() {
    let s = DetectionStore::new();
    s.put_detection(det(plate("ZZ999ZZ"), 0, 0, 1));
    let id = s.put_detection(det(plate("AB123CD"), 0, 0, 2));
    let f = DetectionFilter::parse(Some("plate"), Some("AB123CD"), None, None, None).unwrap();
    let got = s.query_detections(&f).unwrap();
    assert_eq!(got.len(), 1);
    assert_eq!(got[0].detection_id, id);
}

#[test]
fn empty_store_and_world_box() {
    let s = DetectionStore::new();
    let f = DetectionFilter::parse(Some("plate"), Some("ZZZZZZZ"), None, None, None).unwrap();
    assert!(s.query_detections(&f).unwrap().is_empty());
    for i in 0..10 {
        s.put_detection(det(Observation::Gps, i * 100_000_000 - 400_000_000, -i * 170_000_000, 10 - i as u64));
    }
    let world = DetectionFilter {
        bbox: Some(GeoBox::WORLD),
        ..Default::default()
    };
    let got = s.query_detections(&world).unwrap();
    assert_eq!(got.len(), 10);
    // ordered by detection time, which runs opposite to insertion here
    assert!(got.windows(2).all(|w| w[0].detected_at_ms <= w[1].detected_at_ms));
}

#[test]
fn invalid_filter_rejected_at_query() {
    let s = DetectionStore::new();
    let f = DetectionFilter {
        t_from: Some(5),
        t_to: Some(1),
        ..Default::default()
    };
    assert!(matches!(s.query_detections(&f), Err(StoreError::BadFilter(_))));
}

#[test]
fn blobs() {
    let b = BlobStore::new();
    let d1 = b.put_blob(b"hello".to_vec());
    assert_eq!(b.put_blob(b"hello".to_vec()), d1);
    assert_eq!(b.len(), 1);
    assert_eq!(b.get_blob(d1).unwrap(), b"hello");
    assert!(matches!(b.get_blob(crate::model::BlobDigest(1)), Err(StoreError::NotFound(_))));
}

#[test]
fn watchlist_ops() {
    let w = WatchlistStore::new();
    assert_eq!(w.add_json("plate", &json!("AB123CD"), "stolen", 0).unwrap(), 1);
    assert!(matches!(w.add_json("plate", &json!("AB123CD"), "again", 0), Err(StoreError::DuplicateEntry(1))));
    assert!(matches!(w.add_json("face", &json!(5000), "", 0), Err(StoreError::BadValue(_))));
    assert!(matches!(w.add_json("gps", &json!(null), "", 0), Err(StoreError::BadValue(_))));
    assert_eq!(w.add(Target::Face(FaceCode::new(7).unwrap()), "f", 0).unwrap(), 2);
    w.remove(1).unwrap();
    assert!(matches!(w.remove(1), Err(StoreError::UnknownEntry(1))));
    let ids: Vec<u64> = w.list().iter().map(|e| e.entry_id).collect();
    assert_eq!(ids, [2]);
    // removed ids are never reused
    assert_eq!(w.add_json("plate", &json!("AB123CD"), "back", 0).unwrap(), 3);
}

#[test]
fn snapshot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = Stores::new();
    let crop = s.blobs.put_blob(vec![1, 2, 3]);
    let mut d = det(plate("AB123CD"), 488_566_000, 23_522_000, 9);
    d.crop_blob = Some(crop);
    s.detections.put_detection(d);
    s.detections.put_detection(det(Observation::Face(FaceCode::new(9).unwrap()), 1, 2, 10));
    s.watchlist.add_json("plate", &json!("AB123CD"), "x", 3).unwrap();
    s.watchlist.add_json("face", &json!(9), "y", 4).unwrap();
    s.watchlist.remove(1).unwrap();
    s.save_dir(dir.path()).unwrap();

    let text = std::fs::read_to_string(dir.path().join(DETECTIONS_FILE)).unwrap();
    assert_eq!(text.lines().count(), 2);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["kind"], "plate");
    assert_eq!(first["value"], "AB123CD");

    let back = Stores::load_dir(dir.path()).unwrap();
    assert_eq!(back.detections.all(), s.detections.all());
    assert_eq!(back.watchlist.list(), s.watchlist.list());
    assert_eq!(back.blobs.get_blob(crop).unwrap(), [1, 2, 3]);
    assert_eq!(back.detections.put_detection(det(Observation::Gps, 0, 0, 11)), 3);
}

#[test]
fn replay_rejects_gaps() {
    let line = serde_json::to_string(&Detection {
        detection_id: 2,
        ..det(Observation::Gps, 0, 0, 0)
    })
    .unwrap();
    assert!(matches!(DetectionStore::replay(line.as_bytes()), Err(StoreError::Corrupt(_))));
}

fn arb_detection() -> impl Strategy<Value = Detection> {
    let obs = prop_oneof![
        Just(Observation::Gps),
        (0u8..6).prop_map(|i| plate(&format!("AB{i:03}CD"))),
        (0u16..6).prop_map(|c| Observation::Face(FaceCode::new(c).unwrap())),
    ];
    // a few hundred grid cells either side of zero
    (obs, -300_000i32..300_000, -300_000i32..300_000, 0u64..50)
        .prop_map(|(o, lat, lon, t)| det(o, lat, lon, t))
}

fn arb_filter() -> impl Strategy<Value = DetectionFilter> {
    let kind = prop::option::of(prop_oneof![
        Just(DetectionKind::Plate),
        Just(DetectionKind::Face),
        Just(DetectionKind::Gps)
    ]);
    let time = prop::option::of(0u64..50);
    let bbox = prop::option::of((-300_000i32..300_000, -300_000i32..300_000, 0i32..400_000, 0i32..400_000));
    (kind, any::<bool>(), 0u8..6, time.clone(), time, bbox).prop_map(|(kind, with_value, v, a, b, bbox)| {
        let value = match (kind, with_value) {
            (Some(DetectionKind::Plate), true) => Some(plate(&format!("AB{v:03}CD"))),
            (Some(DetectionKind::Face), true) => Some(Observation::Face(FaceCode::new(v as u16).unwrap())),
            _ => None,
        };
        let (t_from, t_to) = match (a, b) {
            (Some(a), Some(b)) => (Some(a.min(b)), Some(a.max(b))),
            other => other,
        };
        DetectionFilter {
            kind,
            value,
            t_from,
            t_to,
            bbox: bbox.map(|(la, lo, h, w)| GeoBox {
                min_lat_e7: la,
                min_lon_e7: lo,
                max_lat_e7: la + h,
                max_lon_e7: lo + w,
            }),
        }
    })
}

proptest! {
    #[test]
    fn index_matches_scan(ds in prop::collection::vec(arb_detection(), 0..200), fs in prop::collection::vec(arb_filter(), 1..20)) {
        let s = DetectionStore::new();
        for d in ds {
            s.put_detection(d);
        }
        let log = s.all();
        for f in fs {
            let mut want: Vec<Detection> = log.iter().filter(|d| f.matches(d)).cloned().collect();
            want.sort_by_key(|d| (d.detected_at_ms, d.detection_id));
            prop_assert_eq!(s.query_detections(&f).unwrap(), want);
        }
    }

    #[test]
    fn blob_round_trip(bytes in prop::collection::vec(any::<u8>(), 0..4096)) {
        let b = BlobStore::new();
        let d = b.put_blob(bytes.clone());
        prop_assert_eq!(b.get_blob(d).unwrap(), bytes);
    }
}

#[test]
fn blob_one_mebibyte() {
    let bytes: Vec<u8> = (0..1usize << 20).map(|i| (i * 31 % 251) as u8).collect();
    let b = BlobStore::new();
    let d = b.put_blob(bytes.clone());
    assert_eq!(b.get_blob(d).unwrap(), bytes);
}
