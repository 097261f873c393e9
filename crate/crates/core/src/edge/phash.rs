//! 64-bit average hash.

use crate::frame::GeoFrame;

const GRID: usize = 8;

/// Box-averages the frame onto an 8x8 grid with integer arithmetic, then
/// sets each bit whose cell average is at least the grid mean. Bits are
/// packed row-major, MSB first.
pub fn phash(frame: &GeoFrame) -> u64 {
    let (w, h) = (frame.width() as usize, frame.height() as usize);
    let span = |i: usize, n: usize| {
        let lo = i * n / GRID;
        let hi = ((i + 1) * n / GRID).max(lo + 1).min(n);
        (lo.min(n - 1), hi)
    };
    let mut cells = [0u64; GRID * GRID];
    for gy in 0..GRID {
        let (y0, y1) = span(gy, h);
        for gx in 0..GRID {
            let (x0, x1) = span(gx, w);
            let mut sum = 0u64;
            for y in y0..y1 {
                let row = &frame.pixels()[y * w + x0..y * w + x1];
                sum += row.iter().map(|&p| p as u64).sum::<u64>();
            }
            cells[gy * GRID + gx] = sum / ((x1 - x0) * (y1 - y0)) as u64;
        }
    }
    let total: u64 = cells.iter().sum();
    // cell >= total / 64, compared without division
    cells.iter().fold(0u64, |acc, &c| (acc << 1) | (c * (GRID * GRID) as u64 >= total) as u64)
}

pub fn hamming(a: u64, b: u64) -> u32 {
    (a ^ b).count_ones()
}
