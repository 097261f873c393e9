//! The GFRM frame container.
//!
//! Layout (little-endian):
//!
//! | offset | field                         |
//! |-------:|-------------------------------|
//! | 0      | magic `GFRM`                  |
//! | 4      | version `u8` = 1              |
//! | 5      | flags `u8` (bit0 = has_gps)   |
//! | 6      | vehicle_id `u64`              |
//! | 14     | timestamp_ms `u64`            |
//! | 22     | lat_e7 `i32`                  |
//! | 26     | lon_e7 `i32`                  |
//! | 30     | width `u16`                   |
//! | 32     | height `u16`                  |
//! | 34     | pixels, `width * height` bytes |

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::GpsFix;

pub const MAGIC: &[u8; 4] = b"GFRM";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 34;
pub const MAX_DIM: u16 = 4096;

const FLAG_HAS_GPS: u8 = 0x01;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FrameError {
    #[error("bad magic, expected GFRM")]
    BadMagic,
    #[error("unsupported container version {0}")]
    BadVersion(u8),
    #[error("truncated frame: need {needed} bytes, got {got}")]
    Truncated { needed: usize, got: usize },
    #[error("{0} trailing bytes after pixel data")]
    TrailingBytes(usize),
    #[error("coordinates out of range: lat_e7={lat_e7} lon_e7={lon_e7}")]
    OutOfRange { lat_e7: i32, lon_e7: i32 },
    #[error("invalid dimensions {width}x{height}")]
    BadDimensions { width: u16, height: u16 },
    #[error("pixel buffer has {got} bytes, expected {expected}")]
    PixelCount { expected: usize, got: usize },
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Content digest of an encoded frame.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct FrameId(pub u64);

impl fmt::Display for FrameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl fmt::Debug for FrameId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FrameId({self})")
    }
}

impl From<FrameId> for String {
    fn from(id: FrameId) -> Self {
        id.to_string()
    }
}

impl TryFrom<String> for FrameId {
    type Error = std::num::ParseIntError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        u64::from_str_radix(&s, 16).map(FrameId)
    }
}

/// One captured grayscale image with its geotag.
///
/// Fields are private so the `pixels.len() == width * height` invariant
/// cannot be broken after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeoFrame {
    vehicle_id: u64,
    fix: GpsFix,
    has_gps: bool,
    width: u16,
    height: u16,
    pixels: Vec<u8>,
    frame_id: FrameId,
}

impl GeoFrame {
    pub fn new(vehicle_id: u64, fix: GpsFix, width: u16, height: u16, pixels: Vec<u8>) -> Result<Self, FrameError> {
        Self::build(vehicle_id, fix, true, width, height, pixels)
    }

    /// A frame whose geotag is absent (flags bit0 cleared). The timestamp is kept.
    pub fn without_gps(vehicle_id: u64, timestamp_ms: u64, width: u16, height: u16, pixels: Vec<u8>) -> Result<Self, FrameError> {
        Self::build(vehicle_id, GpsFix::new(0, 0, timestamp_ms), false, width, height, pixels)
    }

    fn build(vehicle_id: u64, fix: GpsFix, has_gps: bool, width: u16, height: u16, pixels: Vec<u8>) -> Result<Self, FrameError> {
        if width == 0 || height == 0 || width > MAX_DIM || height > MAX_DIM {
            return Err(FrameError::BadDimensions { width, height });
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(FrameError::PixelCount {
                expected,
                got: pixels.len(),
            });
        }
        if !fix.is_valid() {
            return Err(FrameError::OutOfRange {
                lat_e7: fix.lat_e7,
                lon_e7: fix.lon_e7,
            });
        }
        let mut frame = Self {
            vehicle_id,
            fix,
            has_gps,
            width,
            height,
            pixels,
            frame_id: FrameId(0),
        };
        frame.frame_id = FrameId(fnv1a64(&frame.encode()));
        Ok(frame)
    }

    pub fn vehicle_id(&self) -> u64 {
        self.vehicle_id
    }

    pub fn fix(&self) -> GpsFix {
        self.fix
    }

    pub fn has_gps(&self) -> bool {
        self.has_gps
    }

    pub fn timestamp_ms(&self) -> u64 {
        self.fix.timestamp_ms
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width as usize + x]
    }

    pub fn frame_id(&self) -> FrameId {
        self.frame_id
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.pixels.len()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(if self.has_gps { FLAG_HAS_GPS } else { 0 });
        out.extend_from_slice(&self.vehicle_id.to_le_bytes());
        out.extend_from_slice(&self.fix.timestamp_ms.to_le_bytes());
        out.extend_from_slice(&self.fix.lat_e7.to_le_bytes());
        out.extend_from_slice(&self.fix.lon_e7.to_le_bytes());
        out.extend_from_slice(&self.width.to_le_bytes());
        out.extend_from_slice(&self.height.to_le_bytes());
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, FrameError> {
        if bytes.len() < HEADER_LEN {
            if bytes.len() >= 4 && &bytes[..4] != MAGIC {
                return Err(FrameError::BadMagic);
            }
            return Err(FrameError::Truncated {
                needed: HEADER_LEN,
                got: bytes.len(),
            });
        }
        if &bytes[..4] != MAGIC {
            return Err(FrameError::BadMagic);
        }
        if bytes[4] != VERSION {
            return Err(FrameError::BadVersion(bytes[4]));
        }
        let flags = bytes[5];
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let i32_at = |o: usize| i32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u16_at = |o: usize| u16::from_le_bytes(bytes[o..o + 2].try_into().unwrap());
        let vehicle_id = u64_at(6);
        let fix = GpsFix::new(i32_at(22), i32_at(26), u64_at(14));
        let (width, height) = (u16_at(30), u16_at(32));
        let needed = HEADER_LEN + width as usize * height as usize;
        if bytes.len() < needed {
            return Err(FrameError::Truncated {
                needed,
                got: bytes.len(),
            });
        }
        if bytes.len() > needed {
            return Err(FrameError::TrailingBytes(bytes.len() - needed));
        }
        Self::build(
            vehicle_id,
            fix,
            flags & FLAG_HAS_GPS != 0,
            width,
            height,
            bytes[HEADER_LEN..].to_vec(),
        )
    }
}

pub fn encode_frame(frame: &GeoFrame) -> Vec<u8> {
    frame.encode()
}

pub fn decode_frame(bytes: &[u8]) -> Result<GeoFrame, FrameError> {
    GeoFrame::decode(bytes)
}
