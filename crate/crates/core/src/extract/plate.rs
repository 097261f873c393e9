use crate::frame::GeoFrame;
use crate::model::{PlateCode, PLATE_LEN};
use crate::synthscene::font::{self, GLYPH_H, GLYPH_W};
use crate::synthscene::render::{PLATE_GLYPH_OFFSET, PLATE_UNIT_H, PLATE_UNIT_W};

use super::components::{framed_candidates, BBox, LabelMap, Shape};
use super::{ExtractConfig, ExtractCounters};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlateCandidate {
    pub bbox: BBox,
    pub decoded: PlateCode,
    /// Smallest gap, over the seven glyphs, between the best and second-best
    /// template distance.
    pub min_template_score_margin: u32,
}

enum GlyphDecode {
    Char(u8, u32),
    Ambiguous,
}

fn decode_glyph(map: &LabelMap, b: &BBox, index: usize) -> GlyphDecode {
    let mut bits: u64 = 0;
    for row in 0..GLYPH_H {
        for col in 0..GLYPH_W {
            let u = (PLATE_GLYPH_OFFSET + index * (GLYPH_W + 1) + col) as f64;
            let v = (PLATE_GLYPH_OFFSET + row) as f64;
            let lit = map.majority(b, PLATE_UNIT_W, PLATE_UNIT_H, u, u + 1.0, v, v + 1.0);
            bits = (bits << 1) | lit as u64;
        }
    }
    let (mut best, mut best_d, mut second_d, mut ties) = (0u8, u32::MAX, u32::MAX, 0);
    for &(ch, tpl) in font::templates() {
        let d = (bits ^ tpl).count_ones();
        if d < best_d {
            second_d = best_d;
            best_d = d;
            best = ch;
            ties = 1;
        } else if d == best_d {
            ties += 1;
            second_d = d;
        } else if d < second_d {
            second_d = d;
        }
    }
    if ties > 1 {
        GlyphDecode::Ambiguous
    } else {
        GlyphDecode::Char(best, second_d - best_d)
    }
}

/// Locates and decodes every plate region in `frame`.
///
/// A candidate with a glyph that ties between two templates is dropped and
/// counted in `counters.ambiguous_glyphs`.
pub fn find_plates(frame: &GeoFrame, cfg: &ExtractConfig, counters: &mut ExtractCounters) -> Vec<PlateCandidate> {
    let map = LabelMap::new(frame, cfg.threshold);
    find_plates_in(&map, cfg, counters)
}

pub(crate) fn find_plates_in(map: &LabelMap, cfg: &ExtractConfig, counters: &mut ExtractCounters) -> Vec<PlateCandidate> {
    let mut out = Vec::new();
    'cand: for cand in framed_candidates(map, cfg).into_iter().filter(|c| c.shape == Shape::Plate) {
        let mut code = [0u8; PLATE_LEN];
        let mut margin = u32::MAX;
        for (i, slot) in code.iter_mut().enumerate() {
            match decode_glyph(map, &cand.bbox, i) {
                GlyphDecode::Char(ch, m) => {
                    *slot = ch;
                    margin = margin.min(m);
                }
                GlyphDecode::Ambiguous => {
                    counters.ambiguous_glyphs += 1;
                    continue 'cand;
                }
            }
        }
        let decoded = std::str::from_utf8(&code).ok().and_then(|s| s.parse().ok()).expect("font alphabet is the plate alphabet");
        out.push(PlateCandidate {
            bbox: cand.bbox,
            decoded,
            min_template_score_margin: margin,
        });
    }
    out
}
