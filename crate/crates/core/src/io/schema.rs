//! On-disk JSON formats. Every file carries `schema_version`.
//!
//! Detections (`detections.json`):
//!
//! ```json
//! {"schema_version": 1, "scenes": [{"scene": "s0", "frames": [
//!   {"frame_index": 0, "timestamp": 0.0, "detections": [
//!     {"translation": [x, y, z], "size": [l, w, h], "rotation_yaw": 0.1,
//!      "velocity": [vx, vy], "detection_name": "car", "detection_score": 0.8}]}]}]}
//! ```
//!
//! Tracking results use the same nesting with `tracks` entries
//! `{translation, size, rotation_yaw, velocity, tracking_id, tracking_name,
//! tracking_score}` where `tracking_id` is `"<class>:<counter>"`.
//!
//! Ground truth uses `objects` entries `{translation, size, rotation_yaw,
//! velocity, instance_id, tracking_name}`.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub translation: [f64; 3],
    pub size: [f64; 3],
    pub rotation_yaw: f64,
    pub velocity: [f64; 2],
    pub detection_name: String,
    pub detection_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionFrameRecord {
    pub frame_index: u64,
    pub timestamp: f64,
    pub detections: Vec<DetectionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSceneRecord {
    pub scene: String,
    pub frames: Vec<DetectionFrameRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionsFile {
    pub schema_version: u32,
    pub scenes: Vec<DetectionSceneRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackRecord {
    pub translation: [f64; 3],
    pub size: [f64; 3],
    pub rotation_yaw: f64,
    pub velocity: [f64; 2],
    pub tracking_id: String,
    pub tracking_name: String,
    pub tracking_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFrameRecord {
    pub frame_index: u64,
    pub timestamp: f64,
    pub tracks: Vec<TrackRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsSceneRecord {
    pub scene: String,
    pub frames: Vec<ResultsFrameRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub schema_version: u32,
    pub scenes: Vec<ResultsSceneRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthObject {
    pub translation: [f64; 3],
    pub size: [f64; 3],
    pub rotation_yaw: f64,
    pub velocity: [f64; 2],
    pub instance_id: String,
    pub tracking_name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFrameRecord {
    pub frame_index: u64,
    pub timestamp: f64,
    pub objects: Vec<GroundTruthObject>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthSceneRecord {
    pub scene: String,
    pub frames: Vec<GroundTruthFrameRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFile {
    pub schema_version: u32,
    pub scenes: Vec<GroundTruthSceneRecord>,
}
