//! Simulation core for a vehicular cloud video-service pipeline.
//!
//! Vehicles capture synthetic geotagged frames ([`synthscene`]), a road-side
//! unit removes redundant frames and dispatches the rest ([`edge`]) over a
//! modeled network ([`netsim`]) to cloud workers that decode plates, face
//! markers and GPS fixes ([`extract`]). Detections are persisted ([`store`])
//! and matched against an operator watchlist ([`gateway`]). [`harness`]
//! wires everything into runnable scenarios.

pub mod edge;
pub mod extract;
pub mod frame;
pub mod gateway;
pub mod geo;
pub mod harness;
pub mod model;
pub mod netsim;
pub mod store;
pub mod synthscene;

pub use frame::{decode_frame, encode_frame, FrameError, FrameId, GeoFrame};
pub use geo::{haversine_m, GpsFix};
pub use model::{BlobDigest, Detection, DetectionKind, FaceCode, MatchEvent, Observation, PlateCode, Target, WatchlistEntry};
