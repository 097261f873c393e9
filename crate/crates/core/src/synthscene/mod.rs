//! Synthetic driving scenes: exactly decodable plate regions and face
//! markers, frame composition with salt-and-pepper noise, and trace
//! generation.

pub mod font;
pub mod render;
pub mod scene;
pub mod trace;

use thiserror::Error;

pub use render::{render_face_marker, render_plate_region, Bitmap};
pub use scene::{compose_frame, SceneItem, SceneSpec};
pub use trace::{gen_trace, read_trace, write_trace, Trace, TraceParams, TraceStep};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("invalid code {0:?}")]
    BadCode(String),
    #[error("scale must be at least 1")]
    BadScale,
    #[error("noise level {0} outside [0, 1]")]
    BadNoise(f64),
    #[error("item {index} does not fit inside the frame")]
    ItemOutOfBounds { index: usize },
    #[error("items {first} and {second} overlap")]
    ItemsOverlap { first: usize, second: usize },
    #[error("bad trace parameters: {0}")]
    BadParams(String),
    #[error("trace line {line}: {reason}")]
    BadTrace { line: usize, reason: String },
    #[error(transparent)]
    Frame(#[from] crate::frame::FrameError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
