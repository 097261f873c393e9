use crate::frame::GeoFrame;
use crate::model::FaceCode;
use crate::synthscene::render::{FACE_BORDER_UNIT, FACE_CELL_UNIT, FACE_GRID, FACE_UNIT_SIDE};

use super::components::{framed_candidates, BBox, LabelMap, Shape};
use super::{ExtractConfig, ExtractCounters};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceCandidate {
    pub bbox: BBox,
    pub code: FaceCode,
}

/// Reads the 4x4 cell grid of a marker, sampling the central half of each cell.
fn read_cells(map: &LabelMap, b: &BBox) -> [bool; 16] {
    std::array::from_fn(|i| {
        let (row, col) = (i / FACE_GRID, i % FACE_GRID);
        let u0 = (FACE_BORDER_UNIT + col * FACE_CELL_UNIT) as f64 + 1.0;
        let v0 = (FACE_BORDER_UNIT + row * FACE_CELL_UNIT) as f64 + 1.0;
        map.majority(b, FACE_UNIT_SIDE, FACE_UNIT_SIDE, u0, u0 + 2.0, v0, v0 + 2.0)
    })
}

/// Checks row parity and assembles the 12 data bits, MSB first.
pub fn decode_cells(cells: &[bool; 16]) -> Option<FaceCode> {
    let mut code: u16 = 0;
    for row in 0..FACE_GRID {
        let mut parity = false;
        for col in 0..3 {
            let bit = cells[row * FACE_GRID + col];
            parity ^= bit;
            code = (code << 1) | bit as u16;
        }
        if parity != cells[row * FACE_GRID + 3] {
            return None;
        }
    }
    FaceCode::new(code).ok()
}

/// Locates face markers and verifies their parity. Failing candidates are
/// dropped and counted in `counters.parity_failures`.
pub fn find_faces(frame: &GeoFrame, cfg: &ExtractConfig, counters: &mut ExtractCounters) -> Vec<FaceCandidate> {
    let map = LabelMap::new(frame, cfg.threshold);
    find_faces_in(&map, cfg, counters)
}

pub(crate) fn find_faces_in(map: &LabelMap, cfg: &ExtractConfig, counters: &mut ExtractCounters) -> Vec<FaceCandidate> {
    let mut out = Vec::new();
    for cand in framed_candidates(map, cfg).into_iter().filter(|c| c.shape == Shape::Face) {
        match decode_cells(&read_cells(map, &cand.bbox)) {
            Some(code) => out.push(FaceCandidate { bbox: cand.bbox, code }),
            None => counters.parity_failures += 1,
        }
    }
    out
}
