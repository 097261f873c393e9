//! Records that flow between the tiers: detections, watchlist entries, matches.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::FrameId;
use crate::geo::GpsFix;

pub const PLATE_LEN: usize = 7;
pub const FACE_CODE_LIMIT: u16 = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValueError {
    #[error("plate code must be 7 characters from A-Z0-9, got {0:?}")]
    BadPlate(String),
    #[error("face code must be below 4096, got {0}")]
    BadFace(i64),
    #[error("unrecognised value {0:?}")]
    Unparsable(String),
}

/// A 7-character plate string over `[A-Z0-9]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct PlateCode([u8; PLATE_LEN]);

impl PlateCode {
    pub fn as_bytes(&self) -> &[u8; PLATE_LEN] {
        &self.0
    }

    pub fn as_str(&self) -> &str {
        // Constructed from ASCII only.
        std::str::from_utf8(&self.0).unwrap()
    }
}

impl FromStr for PlateCode {
    type Err = ValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        if bytes.len() != PLATE_LEN || !bytes.iter().all(|b| b.is_ascii_uppercase() || b.is_ascii_digit()) {
            return Err(ValueError::BadPlate(s.to_string()));
        }
        let mut code = [0u8; PLATE_LEN];
        code.copy_from_slice(bytes);
        Ok(Self(code))
    }
}

impl TryFrom<String> for PlateCode {
    type Error = ValueError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<PlateCode> for String {
    fn from(p: PlateCode) -> Self {
        p.as_str().to_string()
    }
}

impl fmt::Display for PlateCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for PlateCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PlateCode({})", self.as_str())
    }
}

/// A 12-bit face marker code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u16", try_from = "u16")]
pub struct FaceCode(u16);

impl FaceCode {
    pub fn new(code: u16) -> Result<Self, ValueError> {
        if code < FACE_CODE_LIMIT {
            Ok(Self(code))
        } else {
            Err(ValueError::BadFace(code as i64))
        }
    }

    pub fn get(self) -> u16 {
        self.0
    }

    pub fn hamming(self, other: FaceCode) -> u32 {
        (self.0 ^ other.0).count_ones()
    }
}

impl TryFrom<u16> for FaceCode {
    type Error = ValueError;

    fn try_from(v: u16) -> Result<Self, Self::Error> {
        FaceCode::new(v)
    }
}

impl From<FaceCode> for u16 {
    fn from(f: FaceCode) -> Self {
        f.0
    }
}

impl fmt::Display for FaceCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionKind {
    Plate,
    Face,
    Gps,
}

impl FromStr for DetectionKind {
    type Err = ValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plate" => Ok(Self::Plate),
            "face" => Ok(Self::Face),
            "gps" => Ok(Self::Gps),
            _ => Err(ValueError::Unparsable(s.to_string())),
        }
    }
}

impl fmt::Display for DetectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Plate => "plate",
            Self::Face => "face",
            Self::Gps => "gps",
        })
    }
}

/// What an extractor observed. Serialises flat as `"kind"` plus `"value"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Observation {
    Plate(PlateCode),
    Face(FaceCode),
    Gps,
}

impl Observation {
    pub fn kind(&self) -> DetectionKind {
        match self {
            Self::Plate(_) => DetectionKind::Plate,
            Self::Face(_) => DetectionKind::Face,
            Self::Gps => DetectionKind::Gps,
        }
    }

    /// Parses `value` in the domain of `kind`. Face codes accept decimal text.
    pub fn parse(kind: DetectionKind, value: &str) -> Result<Self, ValueError> {
        match kind {
            DetectionKind::Plate => value.parse().map(Self::Plate),
            DetectionKind::Face => {
                let n: i64 = value.trim().parse().map_err(|_| ValueError::Unparsable(value.to_string()))?;
                if !(0..FACE_CODE_LIMIT as i64).contains(&n) {
                    return Err(ValueError::BadFace(n));
                }
                Ok(Self::Face(FaceCode(n as u16)))
            }
            DetectionKind::Gps if value.is_empty() => Ok(Self::Gps),
            DetectionKind::Gps => Err(ValueError::Unparsable(value.to_string())),
        }
    }

    /// Parses a JSON value (string for plates, number or decimal string for faces).
    pub fn from_json(kind: DetectionKind, value: &serde_json::Value) -> Result<Self, ValueError> {
        match (kind, value) {
            (DetectionKind::Face, serde_json::Value::Number(n)) => {
                let n = n.as_i64().ok_or_else(|| ValueError::Unparsable(n.to_string()))?;
                if !(0..FACE_CODE_LIMIT as i64).contains(&n) {
                    return Err(ValueError::BadFace(n));
                }
                Ok(Self::Face(FaceCode(n as u16)))
            }
            (_, serde_json::Value::String(s)) => Self::parse(kind, s),
            (DetectionKind::Gps, serde_json::Value::Null) => Ok(Self::Gps),
            (_, other) => Err(ValueError::Unparsable(other.to_string())),
        }
    }
}

/// Digest of a stored blob, rendered as 16 lowercase hex digits.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BlobDigest(pub u64);

impl fmt::Display for BlobDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl fmt::Debug for BlobDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlobDigest({self})")
    }
}

impl FromStr for BlobDigest {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        u64::from_str_radix(s, 16).map(BlobDigest)
    }
}

impl From<BlobDigest> for String {
    fn from(d: BlobDigest) -> Self {
        d.to_string()
    }
}

impl TryFrom<String> for BlobDigest {
    type Error = std::num::ParseIntError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// An extracted artifact with provenance. `detection_id` is 0 until the
/// detection store assigns one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detection {
    pub detection_id: u64,
    #[serde(flatten)]
    pub observation: Observation,
    pub fix: GpsFix,
    pub source_frame: FrameId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crop_blob: Option<BlobDigest>,
    pub worker_id: String,
    pub detected_at_ms: u64,
}

impl Detection {
    pub fn kind(&self) -> DetectionKind {
        self.observation.kind()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WatchKind {
    Plate,
    Face,
}

/// A watchlist target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Target {
    Plate(PlateCode),
    Face(FaceCode),
}

impl Target {
    pub fn kind(&self) -> WatchKind {
        match self {
            Self::Plate(_) => WatchKind::Plate,
            Self::Face(_) => WatchKind::Face,
        }
    }

    pub fn from_json(kind: &str, value: &serde_json::Value) -> Result<Self, ValueError> {
        let kind: DetectionKind = kind.parse()?;
        match Observation::from_json(kind, value)? {
            Observation::Plate(p) => Ok(Self::Plate(p)),
            Observation::Face(f) => Ok(Self::Face(f)),
            Observation::Gps => Err(ValueError::Unparsable("gps".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WatchlistEntry {
    pub entry_id: u64,
    #[serde(flatten)]
    pub target: Target,
    pub label: String,
    pub created_at_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchEvent {
    pub match_id: u64,
    pub entry_id: u64,
    pub detection_id: u64,
    pub fix: GpsFix,
    pub matched_at_ms: u64,
}
