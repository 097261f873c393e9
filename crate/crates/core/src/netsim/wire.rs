//! Message framing: `u32` body length (LE), `u8` type, body.

use serde::{Deserialize, Serialize};

use super::NetError;

pub const FRAMING_LEN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum MessageKind {
    FrameUpload = 1,
    DetectionRecord = 2,
    Ack = 3,
    Control = 4,
}

impl TryFrom<u8> for MessageKind {
    type Error = NetError;

    fn try_from(v: u8) -> Result<Self, NetError> {
        match v {
            1 => Ok(Self::FrameUpload),
            2 => Ok(Self::DetectionRecord),
            3 => Ok(Self::Ack),
            4 => Ok(Self::Control),
            other => Err(NetError::BadMessageType(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireMessage {
    pub kind: MessageKind,
    pub body: Vec<u8>,
}

impl WireMessage {
    pub fn new(kind: MessageKind, body: Vec<u8>) -> Self {
        Self { kind, body }
    }

    /// Bytes on the wire, framing included.
    pub fn wire_len(&self) -> usize {
        FRAMING_LEN + self.body.len()
    }

    pub fn encode(&self) -> Result<Vec<u8>, NetError> {
        let len = u32::try_from(self.body.len()).map_err(|_| NetError::MessageTooLarge(self.body.len()))?;
        let mut out = Vec::with_capacity(self.wire_len());
        out.extend_from_slice(&len.to_le_bytes());
        out.push(self.kind as u8);
        out.extend_from_slice(&self.body);
        Ok(out)
    }

    /// Decodes one message from the front of `bytes`, returning it and the
    /// number of bytes consumed.
    pub fn decode(bytes: &[u8]) -> Result<(Self, usize), NetError> {
        if bytes.len() < FRAMING_LEN {
            return Err(NetError::ShortMessage);
        }
        let len = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
        let kind = MessageKind::try_from(bytes[4])?;
        let end = FRAMING_LEN + len;
        if bytes.len() < end {
            return Err(NetError::ShortMessage);
        }
        Ok((Self::new(kind, bytes[FRAMING_LEN..end].to_vec()), end))
    }
}
