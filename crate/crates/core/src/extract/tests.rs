use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geo::GpsFix;
use crate::model::{FaceCode, PlateCode, Target};
use crate::synthscene::font::ALPHABET;
use crate::synthscene::{compose_frame, render, SceneItem, SceneSpec};

fn fix() -> GpsFix {
    GpsFix::from_degrees(48.8566, 2.3522, 1_700_000_000_000)
}

fn plate_item(code: &str, x: u32, y: u32, scale: u32) -> SceneItem {
    SceneItem {
        target: Target::Plate(code.parse().unwrap()),
        origin_x: x,
        origin_y: y,
        scale,
    }
}

fn face_item(code: u16, x: u32, y: u32, scale: u32) -> SceneItem {
    SceneItem {
        target: Target::Face(FaceCode::new(code).unwrap()),
        origin_x: x,
        origin_y: y,
        scale,
    }
}

fn compose(items: Vec<SceneItem>, w: u16, h: u16, noise: f64, seed: u64) -> GeoFrame {
    compose_frame(&SceneSpec::new(items), fix(), 1, w, h, noise, seed).unwrap()
}

fn random_plate(rng: &mut impl Rng) -> PlateCode {
    let s: String = (0..7).map(|_| ALPHABET[rng.random_range(0..36)] as char).collect();
    s.parse().unwrap()
}

#[test]
fn plate_round_trip_with_bbox() {
    let f = compose(vec![plate_item("AB123CD", 10, 10, 2)], 160, 60, 0.0, 0);
    let mut c = ExtractCounters::default();
    let found = find_plates(&f, &ExtractConfig::default(), &mut c);
    assert_eq!(found.len(), 1);
    assert_eq!(found[0].decoded.as_str(), "AB123CD");
    assert_eq!(found[0].bbox, BBox { x: 10, y: 10, w: 94, h: 26 });
    assert!(found[0].min_template_score_margin >= 4);
    let dets = extract_plates(&f, &ExtractConfig::default(), &mut c);
    assert_eq!(dets[0].observation, Observation::Plate("AB123CD".parse().unwrap()));
    assert!(dets[0].crop.as_ref().unwrap().starts_with(b"\x89PNG"));
}

#[test]
fn uniform_frames_yield_nothing() {
    for level in [0u8, 48, 127] {
        let f = compose_frame(&SceneSpec { items: vec![], background: level }, fix(), 0, 120, 80, 0.0, 0).unwrap();
        let mut c = ExtractCounters::default();
        assert!(extract_plates(&f, &ExtractConfig::default(), &mut c).is_empty());
        assert!(extract_faces(&f, &ExtractConfig::default(), &mut c).is_empty());
    }
    // a fully white frame is one huge component that frames nothing
    let f = compose_frame(&SceneSpec { items: vec![], background: 255 }, fix(), 0, 120, 80, 0.0, 0).unwrap();
    let mut c = ExtractCounters::default();
    assert!(extract_plates(&f, &ExtractConfig::default(), &mut c).is_empty());
}

#[test]
fn two_disjoint_plates() {
    let f = compose(vec![plate_item("AAAAAAA", 2, 2, 1), plate_item("ZZZZZZZ", 60, 30, 1)], 120, 50, 0.0, 0);
    let mut c = ExtractCounters::default();
    let mut values: Vec<String> = find_plates(&f, &ExtractConfig::default(), &mut c).iter().map(|p| p.decoded.to_string()).collect();
    values.sort();
    assert_eq!(values, ["AAAAAAA", "ZZZZZZZ"]);
}

#[test]
fn face_round_trip() {
    let f = compose(vec![face_item(2749, 5, 5, 2)], 60, 60, 0.0, 0);
    let mut c = ExtractCounters::default();
    let faces = find_faces(&f, &ExtractConfig::default(), &mut c);
    assert_eq!(faces.len(), 1);
    assert_eq!(faces[0].code.get(), 2749);
    assert_eq!(faces[0].bbox, BBox { x: 5, y: 5, w: 40, h: 40 });
    assert_eq!(c.parity_failures, 0);
}

#[test]
fn flipped_data_cell_fails_parity() {
    let scale = 2usize;
    let mut marker = render::render_face_marker(2749, scale).unwrap();
    // flip data cell (row 1, col 1)
    let cell = 4 * scale;
    let (x0, y0) = (2 * scale + cell, 2 * scale + cell);
    let v = if marker.get(x0 + 1, y0 + 1) == 255 { 0 } else { 255 };
    marker.fill_rect(x0, y0, cell, cell, v);
    let mut canvas = render::Bitmap::filled(60, 60, 48);
    canvas.blit(&marker, 5, 5);
    let f = GeoFrame::new(0, fix(), 60, 60, canvas.pixels).unwrap();
    let mut c = ExtractCounters::default();
    assert!(extract_faces(&f, &ExtractConfig::default(), &mut c).is_empty());
    assert_eq!(c.parity_failures, 1);
}

#[test]
fn every_single_bit_flip_is_caught() {
    let cells = render::face_cells(FaceCode::new(0b1010_0110_0101).unwrap());
    assert!(face::decode_cells(&cells).is_some());
    for i in 0..16 {
        let mut bad = cells;
        bad[i] = !bad[i];
        assert!(face::decode_cells(&bad).is_none(), "flip of cell {i} slipped through");
    }
}

#[test]
fn all_face_codes_round_trip() {
    // 4096 codes spread over four frames per scale
    let cfg = ExtractConfig {
        crops: false,
        ..Default::default()
    };
    for scale in 1..=2u32 {
        let side = 20 * scale + 2;
        let per_row = 16u32;
        for chunk in (0..4096u16).collect::<Vec<_>>().chunks(256) {
            let items: Vec<_> = chunk
                .iter()
                .enumerate()
                .map(|(i, &code)| face_item(code, (i as u32 % per_row) * side + 1, (i as u32 / per_row) * side + 1, scale))
                .collect();
            let dim = (per_row * side + 2) as u16;
            let f = compose(items, dim, dim, 0.0, 0);
            let mut c = ExtractCounters::default();
            let mut got: Vec<u16> = find_faces(&f, &cfg, &mut c).iter().map(|x| x.code.get()).collect();
            got.sort();
            assert_eq!(got, chunk.to_vec(), "scale {scale}");
            assert_eq!(c.parity_failures, 0);
        }
    }
}

#[test]
fn plate_survives_light_noise() {
    let f = compose(vec![plate_item("XY987ZW", 20, 12, 1)], 120, 40, 0.01, 7);
    let mut c = ExtractCounters::default();
    let p = find_plates(&f, &ExtractConfig::default(), &mut c);
    assert_eq!(p.len(), 1);
    assert_eq!(p[0].decoded.as_str(), "XY987ZW");
}

#[test]
fn mixed_scene_no_cross_kind_confusion() {
    let items = vec![
        plate_item("AB123CD", 4, 4, 2),
        face_item(4095, 110, 4, 1),
        face_item(0, 110, 40, 3),
        plate_item("QQ000QQ", 4, 70, 1),
    ];
    let f = compose(items, 200, 120, 0.0, 0);
    let cfg = ExtractConfig::default();
    let mut c = ExtractCounters::default();
    let plates: Vec<String> = find_plates(&f, &cfg, &mut c).iter().map(|p| p.decoded.to_string()).collect();
    let mut faces: Vec<u16> = find_faces(&f, &cfg, &mut c).iter().map(|p| p.code.get()).collect();
    faces.sort();
    assert_eq!(plates, ["AB123CD", "QQ000QQ"]);
    assert_eq!(faces, [0, 4095]);
    assert_eq!(c, ExtractCounters::default());
}

#[test]
fn gps_stage() {
    let f = compose(vec![], 10, 10, 0.0, 0);
    assert_eq!(extract_gps(&f).unwrap().observation, Observation::Gps);
    let d = extract_gps(&f).unwrap().into_detection(&f, "w", 5, None);
    assert_eq!(d.fix, fix());
    let bare = GeoFrame::without_gps(1, 5, 4, 4, vec![0; 16]).unwrap();
    assert_eq!(extract_gps(&bare), Err(ExtractError::MissingFix));
}

#[test]
fn stages_agree_parallel_and_serial() {
    let f = compose(vec![plate_item("AB123CD", 4, 4, 1), face_item(77, 70, 4, 1)], 120, 40, 0.0, 0);
    let cfg = ExtractConfig::default();
    let a = run_stages(&f, &cfg, true);
    let b = run_stages(&f, &cfg, false);
    for (x, y) in a.iter().zip(b.iter()) {
        assert_eq!(x.stage, y.stage);
        assert_eq!(x.findings, y.findings);
    }
}

/// Plate recovery rate over 200 seeded random codes at 2% noise.
fn noisy_recovery(scale: u32) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(2024 + scale as u64);
    let cfg = ExtractConfig {
        crops: false,
        ..Default::default()
    };
    let mut ok = 0;
    for i in 0..200u64 {
        let code = random_plate(&mut rng);
        let (w, h) = render::plate_size(scale as usize);
        let f = compose(vec![plate_item(code.as_str(), 8, 8, scale)], (w + 16) as u16, (h + 16) as u16, 0.02, i);
        let mut c = ExtractCounters::default();
        let found = find_plates(&f, &cfg, &mut c);
        if found.len() == 1 && found[0].decoded == code {
            ok += 1;
        }
    }
    ok as f64 / 200.0
}

#[test]
fn noise_tolerance_per_scale() {
    for scale in 1..=4 {
        let rate = noisy_recovery(scale);
        eprintln!("scale {scale}: {:.1}% recovered at 2% noise", rate * 100.0);
        assert!(rate >= 0.95, "scale {scale}: {rate}");
    }
}

mod props {
    use super::*;
    use proptest::prelude::*;

    fn arb_plate() -> impl Strategy<Value = PlateCode> {
        prop::collection::vec(0usize..36, 7).prop_map(|ix| ix.into_iter().map(|i| ALPHABET[i] as char).collect::<String>().parse().unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn plate_round_trip_totality(code in arb_plate(), scale in 1u32..=4, x in 0u32..30, y in 0u32..30) {
            let (w, h) = render::plate_size(scale as usize);
            let f = compose(vec![plate_item(code.as_str(), x, y, scale)], (w as u32 + x + 3) as u16, (h as u32 + y + 3) as u16, 0.0, 0);
            let mut c = ExtractCounters::default();
            let cfg = ExtractConfig::default();
            let found = find_plates(&f, &cfg, &mut c);
            prop_assert_eq!(found.len(), 1);
            prop_assert_eq!(found[0].decoded, code);
            prop_assert_eq!(found[0].bbox, BBox { x: x as usize, y: y as usize, w, h });
            prop_assert!(find_faces(&f, &cfg, &mut c).is_empty());
        }

        #[test]
        fn face_round_trip_totality(code in 0u16..4096, scale in 1u32..=4, x in 0u32..30, y in 0u32..30) {
            let side = 20 * scale;
            let f = compose(vec![face_item(code, x, y, scale)], (side + x + 3) as u16, (side + y + 3) as u16, 0.0, 0);
            let mut c = ExtractCounters::default();
            let cfg = ExtractConfig::default();
            let found = find_faces(&f, &cfg, &mut c);
            prop_assert_eq!(found.len(), 1);
            prop_assert_eq!(found[0].code.get(), code);
            prop_assert!(find_plates(&f, &cfg, &mut c).is_empty());
        }

        #[test]
        fn no_hallucination_on_empty_scenes(seed in any::<u64>(), noise in 0.0f64..0.1, bg in 0u8..128) {
            let spec = SceneSpec { items: vec![], background: bg };
            let f = compose_frame(&spec, fix(), 0, 160, 120, noise, seed).unwrap();
            let mut c = ExtractCounters::default();
            let cfg = ExtractConfig::default();
            prop_assert!(find_plates(&f, &cfg, &mut c).is_empty());
            prop_assert!(find_faces(&f, &cfg, &mut c).is_empty());
        }
    }
}
