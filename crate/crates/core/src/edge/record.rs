use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};

use crate::model::Detection;
use crate::netsim::{MessageKind, WireMessage};

use super::EdgeError;

/// Body of a DETECTION_RECORD message. Crops produced on a vehicle travel
/// inline as base64 PNG since no blob store is reachable from there.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionRecord {
    #[serde(flatten)]
    pub detection: Detection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crop_png_b64: Option<String>,
}

impl DetectionRecord {
    pub fn new(detection: Detection, crop: Option<&[u8]>) -> Self {
        Self {
            detection,
            crop_png_b64: crop.map(|c| STANDARD.encode(c)),
        }
    }

    pub fn crop_png(&self) -> Result<Option<Vec<u8>>, EdgeError> {
        self.crop_png_b64
            .as_deref()
            .map(|s| STANDARD.decode(s).map_err(|e| EdgeError::BadRecord(e.to_string())))
            .transpose()
    }

    pub fn to_message(&self) -> WireMessage {
        WireMessage::new(MessageKind::DetectionRecord, serde_json::to_vec(self).expect("record serializes"))
    }

    pub fn from_message(msg: &WireMessage) -> Result<Self, EdgeError> {
        if msg.kind != MessageKind::DetectionRecord {
            return Err(EdgeError::BadRecord(format!("unexpected {:?}", msg.kind)));
        }
        serde_json::from_slice(&msg.body).map_err(|e| EdgeError::BadRecord(e.to_string()))
    }
}
