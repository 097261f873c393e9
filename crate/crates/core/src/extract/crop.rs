use crate::frame::GeoFrame;

use super::components::BBox;

/// Encodes the `bbox` region of `frame` as an 8-bit grayscale PNG.
pub fn png_crop(frame: &GeoFrame, bbox: &BBox) -> Vec<u8> {
    let mut data = Vec::with_capacity(bbox.area());
    for y in bbox.y..bbox.y + bbox.h {
        let row = y * frame.width() as usize;
        data.extend_from_slice(&frame.pixels()[row + bbox.x..row + bbox.x + bbox.w]);
    }
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, bbox.w as u32, bbox.h as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().expect("in-memory PNG header");
        writer.write_image_data(&data).expect("in-memory PNG body");
    }
    out
}
