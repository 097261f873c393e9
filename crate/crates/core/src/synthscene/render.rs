//! Renderers for plate regions and face markers.

use crate::model::{FaceCode, PlateCode, PLATE_LEN};

use super::font::{self, GLYPH_H, GLYPH_W};
use super::SceneError;

pub const WHITE: u8 = 255;
pub const BLACK: u8 = 0;

/// Unit-scale plate width: seven glyphs with one spacing column, plus a
/// two-pixel border and a one-pixel gap on each side.
pub const PLATE_UNIT_W: usize = (PLATE_LEN * (GLYPH_W + 1) - 1) + 2 * (2 + 1);
pub const PLATE_UNIT_H: usize = GLYPH_H + 2 * (2 + 1);
/// Offset of the first glyph from the plate's top-left corner, in unit pixels.
pub const PLATE_GLYPH_OFFSET: usize = 3;

pub const FACE_GRID: usize = 4;
pub const FACE_CELL_UNIT: usize = 4;
pub const FACE_BORDER_UNIT: usize = 2;
pub const FACE_UNIT_SIDE: usize = FACE_GRID * FACE_CELL_UNIT + 2 * FACE_BORDER_UNIT;

/// A rectangular grayscale patch, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmap {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl Bitmap {
    pub fn filled(width: usize, height: usize, level: u8) -> Self {
        Self {
            width,
            height,
            pixels: vec![level; width * height],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    pub fn fill_rect(&mut self, x: usize, y: usize, w: usize, h: usize, v: u8) {
        for row in y..y + h {
            self.pixels[row * self.width + x..row * self.width + x + w].fill(v);
        }
    }

    /// Copies `src` with its top-left corner at `(x, y)`. Caller checks bounds.
    pub fn blit(&mut self, src: &Bitmap, x: usize, y: usize) {
        for row in 0..src.height {
            let dst = (y + row) * self.width + x;
            self.pixels[dst..dst + src.width].copy_from_slice(&src.pixels[row * src.width..(row + 1) * src.width]);
        }
    }
}

pub fn plate_size(scale: usize) -> (usize, usize) {
    (PLATE_UNIT_W * scale, PLATE_UNIT_H * scale)
}

pub fn face_size(scale: usize) -> (usize, usize) {
    (FACE_UNIT_SIDE * scale, FACE_UNIT_SIDE * scale)
}

/// Renders `code` as white glyphs on a black field inside a white border.
pub fn render_plate_region(code: &str, scale: usize) -> Result<Bitmap, SceneError> {
    let plate: PlateCode = code.parse().map_err(|_| SceneError::BadCode(code.to_string()))?;
    render_plate(&plate, scale)
}

pub fn render_plate(plate: &PlateCode, scale: usize) -> Result<Bitmap, SceneError> {
    if scale == 0 {
        return Err(SceneError::BadScale);
    }
    let (w, h) = plate_size(scale);
    let mut bmp = Bitmap::filled(w, h, WHITE);
    let b = 2 * scale;
    bmp.fill_rect(b, b, w - 2 * b, h - 2 * b, BLACK);
    for (i, &ch) in plate.as_bytes().iter().enumerate() {
        let rows = font::glyph(ch).expect("plate alphabet is covered by the font");
        let gx = PLATE_GLYPH_OFFSET + i * (GLYPH_W + 1);
        for gy in 0..GLYPH_H {
            for col in 0..GLYPH_W {
                if font::glyph_bit(rows, col, gy) {
                    bmp.fill_rect((gx + col) * scale, (PLATE_GLYPH_OFFSET + gy) * scale, scale, scale, WHITE);
                }
            }
        }
    }
    Ok(bmp)
}

/// The sixteen cell bits of a face marker, row-major. Each grid row holds
/// three data bits (MSB first across the whole code) and an even-parity bit.
pub fn face_cells(code: FaceCode) -> [bool; 16] {
    let c = code.get();
    let mut cells = [false; 16];
    for row in 0..FACE_GRID {
        let mut parity = false;
        for col in 0..3 {
            let bit = c >> (11 - (row * 3 + col)) & 1 == 1;
            cells[row * FACE_GRID + col] = bit;
            parity ^= bit;
        }
        cells[row * FACE_GRID + 3] = parity;
    }
    cells
}

pub fn render_face_marker(face_code: u32, scale: usize) -> Result<Bitmap, SceneError> {
    let code = u16::try_from(face_code)
        .ok()
        .and_then(|c| FaceCode::new(c).ok())
        .ok_or_else(|| SceneError::BadCode(face_code.to_string()))?;
    render_face(code, scale)
}

pub fn render_face(code: FaceCode, scale: usize) -> Result<Bitmap, SceneError> {
    if scale == 0 {
        return Err(SceneError::BadScale);
    }
    let (side, _) = face_size(scale);
    let mut bmp = Bitmap::filled(side, side, WHITE);
    let cell = FACE_CELL_UNIT * scale;
    let border = FACE_BORDER_UNIT * scale;
    for (i, white) in face_cells(code).into_iter().enumerate() {
        let (row, col) = (i / FACE_GRID, i % FACE_GRID);
        let v = if white { WHITE } else { BLACK };
        bmp.fill_rect(border + col * cell, border + row * cell, cell, cell, v);
    }
    Ok(bmp)
}
