//! Embedded 5x7 glyph templates for `A-Z0-9`.
//!
//! Each glyph is seven rows of five bits, MSB = leftmost column. Every pair
//! of glyphs differs in at least [`MIN_GLYPH_DISTANCE`] pixels; this is
//! checked once on first use of [`templates`].

use std::sync::OnceLock;

pub const GLYPH_W: usize = 5;
pub const GLYPH_H: usize = 7;
pub const MIN_GLYPH_DISTANCE: u32 = 4;

pub const ALPHABET: &[u8; 36] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

#[rustfmt::skip]
const GLYPHS: [[u8; GLYPH_H]; 36] = [
    [0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001], // A
    [0b11110, 0b01001, 0b01001, 0b01110, 0b01001, 0b01001, 0b11110], // B
    [0b01111, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b01111], // C
    [0b11100, 0b10010, 0b10001, 0b10001, 0b10001, 0b10010, 0b11100], // D
    [0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b11111], // E
    [0b11111, 0b10000, 0b10000, 0b11100, 0b10000, 0b10000, 0b10000], // F
    [0b01110, 0b10001, 0b10000, 0b10111, 0b10001, 0b10001, 0b01111], // G
    [0b10001, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001], // H
    [0b01110, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110], // I
    [0b00111, 0b00010, 0b00010, 0b00010, 0b00010, 0b10010, 0b01100], // J
    [0b10001, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010, 0b10001], // K
    [0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111], // L
    [0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001], // M
    [0b10001, 0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001], // N
    [0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110], // O
    [0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000], // P
    [0b01110, 0b10001, 0b10001, 0b10001, 0b10101, 0b10010, 0b01101], // Q
    [0b11110, 0b10001, 0b10001, 0b11111, 0b10100, 0b10010, 0b10001], // R
    [0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110], // S
    [0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100], // T
    [0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110], // U
    [0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100], // V
    [0b10001, 0b10001, 0b10001, 0b10101, 0b10101, 0b10101, 0b01010], // W
    [0b10001, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001, 0b10001], // X
    [0b10001, 0b10001, 0b10001, 0b01010, 0b00100, 0b00100, 0b00100], // Y
    [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b10000, 0b11111], // Z
    [0b01110, 0b10011, 0b10011, 0b10101, 0b11001, 0b11001, 0b01110], // 0
    [0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b11111], // 1
    [0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111], // 2
    [0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110], // 3
    [0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010], // 4
    [0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110], // 5
    [0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110], // 6
    [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000], // 7
    [0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110], // 8
    [0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100], // 9
];

/// A glyph packed into the low 35 bits, row-major, MSB first.
pub type Template = u64;

fn pack(rows: &[u8; GLYPH_H]) -> Template {
    rows.iter().fold(0, |acc, r| (acc << GLYPH_W) | (*r as u64 & 0x1f))
}

/// Rows of the glyph for `ch`, or `None` outside the alphabet.
pub fn glyph(ch: u8) -> Option<&'static [u8; GLYPH_H]> {
    ALPHABET.iter().position(|&c| c == ch).map(|i| &GLYPHS[i])
}

pub fn glyph_bit(rows: &[u8; GLYPH_H], col: usize, row: usize) -> bool {
    rows[row] >> (GLYPH_W - 1 - col) & 1 == 1
}

/// Smallest Hamming distance between any two glyph templates.
pub fn min_pairwise_distance() -> u32 {
    let packed: Vec<Template> = GLYPHS.iter().map(pack).collect();
    let mut best = u32::MAX;
    for (i, a) in packed.iter().enumerate() {
        for b in &packed[i + 1..] {
            best = best.min((a ^ b).count_ones());
        }
    }
    best
}

/// Packed templates paired with their characters.
///
/// Panics on first call if the embedded font violates the distance bound.
pub fn templates() -> &'static [(u8, Template); 36] {
    static TABLE: OnceLock<[(u8, Template); 36]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let d = min_pairwise_distance();
        assert!(d >= MIN_GLYPH_DISTANCE, "font self-check failed: min glyph distance {d}");
        std::array::from_fn(|i| (ALPHABET[i], pack(&GLYPHS[i])))
    })
}
