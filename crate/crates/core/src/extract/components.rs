//! Binary connected components and candidate framing shared by the plate
//! and face stages.

use crate::frame::GeoFrame;

use super::ExtractConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct BBox {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl BBox {
    pub fn contains(&self, other: &BBox) -> bool {
        other.x >= self.x && other.y >= self.y && other.x + other.w <= self.x + self.w && other.y + other.h <= self.y + self.h
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn aspect(&self) -> f64 {
        self.w as f64 / self.h as f64
    }
}

/// A thresholded frame with 4-connected labels.
pub struct LabelMap {
    pub width: usize,
    pub height: usize,
    pub white: Vec<bool>,
    pub labels: Vec<u32>,
    pub components: Vec<Component>,
}

#[derive(Debug, Clone)]
pub struct Component {
    pub label: u32,
    pub raw: BBox,
    pub pixels: usize,
}

impl LabelMap {
    pub fn new(frame: &GeoFrame, threshold: u8) -> Self {
        let (width, height) = (frame.width() as usize, frame.height() as usize);
        let white: Vec<bool> = frame.pixels().iter().map(|&p| p >= threshold).collect();
        let mut labels = vec![0u32; width * height];
        let mut components = Vec::new();
        let mut stack = Vec::new();
        for start in 0..width * height {
            if !white[start] || labels[start] != 0 {
                continue;
            }
            let label = components.len() as u32 + 1;
            labels[start] = label;
            stack.push(start);
            let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
            let mut count = 0;
            while let Some(i) = stack.pop() {
                let (x, y) = (i % width, i / width);
                count += 1;
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
                let mut visit = |j: usize| {
                    if white[j] && labels[j] == 0 {
                        labels[j] = label;
                        stack.push(j);
                    }
                };
                if x > 0 {
                    visit(i - 1);
                }
                if x + 1 < width {
                    visit(i + 1);
                }
                if y > 0 {
                    visit(i - width);
                }
                if y + 1 < height {
                    visit(i + width);
                }
            }
            components.push(Component {
                label,
                raw: BBox {
                    x: x0,
                    y: y0,
                    w: x1 - x0 + 1,
                    h: y1 - y0 + 1,
                },
                pixels: count,
            });
        }
        Self {
            width,
            height,
            white,
            labels,
            components,
        }
    }

    pub fn is_white(&self, x: usize, y: usize) -> bool {
        self.white[y * self.width + x]
    }

    /// Shrinks a component's box by peeling edge rows and columns that the
    /// component covers less than half of. Stray noise pixels glued to a
    /// marker's outline only ever make sparse edge lines.
    pub fn trimmed_bbox(&self, c: &Component) -> BBox {
        let BBox { mut x, mut y, mut w, mut h } = c.raw;
        let row_count = |x: usize, w: usize, row: usize| (x..x + w).filter(|&cx| self.labels[row * self.width + cx] == c.label).count();
        let col_count = |y: usize, h: usize, col: usize| (y..y + h).filter(|&cy| self.labels[cy * self.width + col] == c.label).count();
        loop {
            let mut changed = false;
            if h > 1 && row_count(x, w, y) * 2 < w {
                y += 1;
                h -= 1;
                changed = true;
            }
            if h > 1 && row_count(x, w, y + h - 1) * 2 < w {
                h -= 1;
                changed = true;
            }
            if w > 1 && col_count(y, h, x) * 2 < h {
                x += 1;
                w -= 1;
                changed = true;
            }
            if w > 1 && col_count(y, h, x + w - 1) * 2 < h {
                w -= 1;
                changed = true;
            }
            if !changed {
                return BBox { x, y, w, h };
            }
        }
    }

    /// Fraction of white pixels in the band between `outer` and `inner` unit
    /// insets of a box divided into `units_w x units_h` unit cells.
    pub fn band_white_fraction(&self, b: &BBox, units_w: usize, units_h: usize, outer: usize, inner: usize) -> f64 {
        let (sx, sy) = (b.w as f64 / units_w as f64, b.h as f64 / units_h as f64);
        let edge = |origin: usize, s: f64, u: usize| origin + (u as f64 * s).round() as usize;
        let (ox0, oy0) = (edge(b.x, sx, outer), edge(b.y, sy, outer));
        let (ox1, oy1) = (edge(b.x, sx, units_w - outer), edge(b.y, sy, units_h - outer));
        let (ix0, iy0) = (edge(b.x, sx, inner), edge(b.y, sy, inner));
        let (ix1, iy1) = (edge(b.x, sx, units_w - inner), edge(b.y, sy, units_h - inner));
        let (mut white, mut total) = (0usize, 0usize);
        for py in oy0..oy1 {
            for px in ox0..ox1 {
                if px >= ix0 && px < ix1 && py >= iy0 && py < iy1 {
                    continue;
                }
                total += 1;
                white += self.is_white(px, py) as usize;
            }
        }
        if total == 0 {
            0.0
        } else {
            white as f64 / total as f64
        }
    }

    /// Majority vote over the unit cell block `[u0, u1) x [v0, v1)`.
    #[allow(clippy::too_many_arguments)]
    pub fn majority(&self, b: &BBox, units_w: usize, units_h: usize, u0: f64, u1: f64, v0: f64, v1: f64) -> bool {
        let (sx, sy) = (b.w as f64 / units_w as f64, b.h as f64 / units_h as f64);
        let px0 = b.x + (u0 * sx).round() as usize;
        let px1 = (b.x + (u1 * sx).round() as usize).max(px0 + 1);
        let py0 = b.y + (v0 * sy).round() as usize;
        let py1 = (b.y + (v1 * sy).round() as usize).max(py0 + 1);
        let (mut white, mut total) = (0usize, 0usize);
        for py in py0..py1.min(self.height) {
            for px in px0..px1.min(self.width) {
                total += 1;
                white += self.is_white(px, py) as usize;
            }
        }
        white * 2 >= total && total > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Plate,
    Face,
}

#[derive(Debug, Clone)]
pub struct Candidate {
    pub shape: Shape,
    pub bbox: BBox,
}

/// Components framed like a plate or a face marker, excluding any whose box
/// lies inside another framed candidate (glyph strokes, inner marker cells).
pub fn framed_candidates(map: &LabelMap, cfg: &ExtractConfig) -> Vec<Candidate> {
    use crate::synthscene::render::{FACE_BORDER_UNIT, FACE_UNIT_SIDE, PLATE_UNIT_H, PLATE_UNIT_W};

    let mut found: Vec<Candidate> = Vec::new();
    for c in &map.components {
        if c.raw.w < 4 || c.raw.h < 4 {
            continue;
        }
        let b = map.trimmed_bbox(c);
        let aspect = b.aspect();
        let shape = if (cfg.plate_aspect.0..=cfg.plate_aspect.1).contains(&aspect) {
            let scale = (b.h as f64 / PLATE_UNIT_H as f64).round();
            if scale < 1.0 || map.band_white_fraction(&b, PLATE_UNIT_W, PLATE_UNIT_H, 0, 2) < cfg.border_min_fill {
                continue;
            }
            // the one-unit gap inside the border is dark on a real plate
            if map.band_white_fraction(&b, PLATE_UNIT_W, PLATE_UNIT_H, 2, 3) > 0.5 {
                continue;
            }
            Shape::Plate
        } else if (cfg.face_aspect.0..=cfg.face_aspect.1).contains(&aspect) {
            let scale = (b.w as f64 / FACE_UNIT_SIDE as f64).round();
            if scale < 1.0 || map.band_white_fraction(&b, FACE_UNIT_SIDE, FACE_UNIT_SIDE, 0, FACE_BORDER_UNIT) < cfg.border_min_fill {
                continue;
            }
            Shape::Face
        } else {
            continue;
        };
        found.push(Candidate { shape, bbox: b });
    }
    found.sort_by(|a, b| b.bbox.area().cmp(&a.bbox.area()).then((a.bbox.y, a.bbox.x).cmp(&(b.bbox.y, b.bbox.x))));
    let mut kept: Vec<Candidate> = Vec::with_capacity(found.len());
    for cand in found {
        if kept.iter().any(|k| k.bbox.contains(&cand.bbox)) {
            continue;
        }
        kept.push(cand);
    }
    kept.sort_by_key(|c| (c.bbox.y, c.bbox.x));
    kept
}
