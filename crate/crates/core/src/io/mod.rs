//! File formats, run configuration, the tracking/evaluation pipeline and BEV
//! plots.

mod config;
mod pipeline;
mod plot;
pub mod schema;

pub use config::RunConfig;
pub use pipeline::{evaluate, evaluation_input, run_tracking, write_report, RunSummary, StreamSummary};
pub use plot::{emit_plots, track_color};

use std::path::Path;

use log::warn;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::{Detection, FrameDetections, ObjectClass, PassthroughState, TrackOutput};

use schema::*;

/// Reads a JSON file, reporting the JSON path and line of any error.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        json_path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn check_version(path: &Path, version: u32) -> Result<()> {
    if version != SCHEMA_VERSION {
        return Err(Error::Validation {
            path: path.to_path_buf(),
            message: format!("unsupported schema_version {version} (expected {SCHEMA_VERSION})"),
        });
    }
    Ok(())
}

/// All frames of one scene, every class mixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneDetections {
    pub scene: String,
    pub frames: Vec<FrameDetections>,
}

impl SceneDetections {
    /// Every frame of the scene restricted to one class; frames without
    /// detections of the class are kept so time keeps advancing.
    pub fn class_stream(&self, class: ObjectClass) -> Vec<FrameDetections> {
        self.frames
            .iter()
            .map(|f| FrameDetections {
                frame_index: f.frame_index,
                timestamp: f.timestamp,
                detections: f
                    .detections
                    .iter()
                    .filter(|d| d.passthrough.class_name == class)
                    .cloned()
                    .collect(),
            })
            .collect()
    }

    pub fn classes(&self) -> Vec<ObjectClass> {
        let mut out: Vec<_> = self
            .frames
            .iter()
            .flat_map(|f| f.detections.iter().map(|d| d.passthrough.class_name))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

fn sort_frames<T>(path: &Path, scene: &str, frames: &mut [T], key: impl Fn(&T) -> (u64, f64)) -> Result<()> {
    frames.sort_by_key(|f| key(f).0);
    for w in frames.windows(2) {
        let (a, ta) = key(&w[0]);
        let (b, tb) = key(&w[1]);
        if a == b {
            return Err(Error::Validation {
                path: path.to_path_buf(),
                message: format!("scene `{scene}`: duplicate frame_index {a}"),
            });
        }
        if tb < ta || !tb.is_finite() || !ta.is_finite() {
            return Err(Error::Validation {
                path: path.to_path_buf(),
                message: format!("scene `{scene}`: timestamp of frame {b} ({tb}) precedes frame {a} ({ta})"),
            });
        }
    }
    Ok(())
}

/// Loads a detections file. Frames are sorted by index; detections of
/// classes that are not tracked are skipped and out-of-range scores are
/// clamped, both with a warning.
pub fn load_detections(path: &Path) -> Result<Vec<SceneDetections>> {
    let file: DetectionsFile = read_json(path)?;
    check_version(path, file.schema_version)?;
    let mut scenes = Vec::with_capacity(file.scenes.len());
    for mut scene in file.scenes {
        sort_frames(path, &scene.scene, &mut scene.frames, |f| (f.frame_index, f.timestamp))?;
        let mut frames = Vec::with_capacity(scene.frames.len());
        for f in scene.frames {
            let mut detections = Vec::with_capacity(f.detections.len());
            for (k, r) in f.detections.into_iter().enumerate() {
                let class = match r.detection_name.parse::<ObjectClass>() {
                    Ok(c) => c,
                    Err(_) => {
                        warn!(
                            "{}: scene `{}` frame {}: skipping detection of untracked class `{}`",
                            path.display(),
                            scene.scene,
                            f.frame_index,
                            r.detection_name
                        );
                        continue;
                    }
                };
                let at = || format!("scene `{}` frame {} detection {k}", scene.scene, f.frame_index);
                if r.translation.iter().chain(&r.velocity).any(|v| !v.is_finite()) || !r.rotation_yaw.is_finite() {
                    return Err(Error::Validation {
                        path: path.to_path_buf(),
                        message: format!("{}: non-finite value", at()),
                    });
                }
                if r.size.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                    return Err(Error::Validation {
                        path: path.to_path_buf(),
                        message: format!("{}: size must be positive, got {:?}", at(), r.size),
                    });
                }
                let mut score = r.detection_score;
                if !(0.0..=1.0).contains(&score) {
                    if score.is_nan() {
                        return Err(Error::Validation {
                            path: path.to_path_buf(),
                            message: format!("{}: detection_score is NaN", at()),
                        });
                    }
                    warn!("{}: {}: clamping detection_score {score} to [0, 1]", path.display(), at());
                    score = score.clamp(0.0, 1.0);
                }
                detections.push(Detection {
                    center: [r.translation[0], r.translation[1]],
                    passthrough: PassthroughState {
                        z: r.translation[2],
                        size: r.size,
                        yaw: r.rotation_yaw,
                        velocity: r.velocity,
                        detection_score: score,
                        class_name: class,
                    },
                    frame_index: f.frame_index,
                    timestamp: f.timestamp,
                });
            }
            frames.push(FrameDetections {
                frame_index: f.frame_index,
                timestamp: f.timestamp,
                detections,
            });
        }
        scenes.push(SceneDetections {
            scene: scene.scene,
            frames,
        });
    }
    Ok(scenes)
}

pub fn detection_record(d: &Detection) -> DetectionRecord {
    let p = &d.passthrough;
    DetectionRecord {
        translation: [d.center[0], d.center[1], p.z],
        size: p.size,
        rotation_yaw: p.yaw,
        velocity: p.velocity,
        detection_name: p.class_name.to_string(),
        detection_score: p.detection_score,
    }
}

pub fn detections_file(scenes: &[SceneDetections]) -> DetectionsFile {
    DetectionsFile {
        schema_version: SCHEMA_VERSION,
        scenes: scenes
            .iter()
            .map(|s| DetectionSceneRecord {
                scene: s.scene.clone(),
                frames: s
                    .frames
                    .iter()
                    .map(|f| DetectionFrameRecord {
                        frame_index: f.frame_index,
                        timestamp: f.timestamp,
                        detections: f.detections.iter().map(detection_record).collect(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

pub fn tracking_id(class: ObjectClass, track_id: u64) -> String {
    format!("{class}:{track_id}")
}

pub fn track_record(t: &TrackOutput) -> TrackRecord {
    let p = &t.passthrough;
    TrackRecord {
        translation: [t.center[0], t.center[1], p.z],
        size: p.size,
        rotation_yaw: p.yaw,
        velocity: p.velocity,
        tracking_id: tracking_id(p.class_name, t.track_id),
        tracking_name: p.class_name.to_string(),
        tracking_score: t.tracking_score,
    }
}

pub fn load_results(path: &Path) -> Result<ResultsFile> {
    let mut file: ResultsFile = read_json(path)?;
    check_version(path, file.schema_version)?;
    for s in &mut file.scenes {
        sort_frames(path, &s.scene, &mut s.frames, |f| (f.frame_index, f.timestamp))?;
    }
    Ok(file)
}

pub fn load_ground_truth(path: &Path) -> Result<GroundTruthFile> {
    let mut file: GroundTruthFile = read_json(path)?;
    check_version(path, file.schema_version)?;
    for s in &mut file.scenes {
        sort_frames(path, &s.scene, &mut s.frames, |f| (f.frame_index, f.timestamp))?;
    }
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(text.as_bytes()).unwrap();
        p
    }

    const ONE: &str = r#"{"schema_version": 1, "scenes": [{"scene": "s", "frames": [
        {"frame_index": 0, "timestamp": 0.0, "detections": [
          {"translation": [1.0, 2.0, 0.5], "size": [4.0, 2.0, 1.5], "rotation_yaw": 0.3,
           "velocity": [1.0, 0.0], "detection_name": "car", "detection_score": 1.3},
          {"translation": [5.0, 2.0, 0.5], "size": [1.0, 1.0, 1.0], "rotation_yaw": 0.0,
           "velocity": [0.0, 0.0], "detection_name": "barrier", "detection_score": 0.5}]}]}]}"#;

    #[test]
    fn one_detection_fully_populated() {
        let dir = tempfile::tempdir().unwrap();
        let scenes = load_detections(&write(dir.path(), "d.json", ONE)).unwrap();
        let d = &scenes[0].frames[0].detections;
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].center, [1.0, 2.0]);
        assert_eq!(d[0].passthrough.z, 0.5);
        assert_eq!(d[0].passthrough.size, [4.0, 2.0, 1.5]);
        assert_eq!(d[0].passthrough.yaw, 0.3);
        assert_eq!(d[0].passthrough.velocity, [1.0, 0.0]);
        assert_eq!(d[0].passthrough.class_name, ObjectClass::Car);
        assert_eq!(d[0].score(), 1.0);
    }

    #[test]
    fn empty_frame_list() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "d.json", r#"{"schema_version": 1, "scenes": [{"scene": "s", "frames": []}]}"#);
        let scenes = load_detections(&p).unwrap();
        assert!(scenes[0].frames.is_empty());
    }

    #[test]
    fn missing_field_names_json_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "d.json",
            r#"{"schema_version": 1, "scenes": [{"scene": "s", "frames": [{"frame_index": 0, "detections": []}]}]}"#,
        );
        match load_detections(&p) {
            Err(Error::Parse { json_path, message, .. }) => {
                assert_eq!(json_path, "scenes[0].frames[0]");
                assert!(message.contains("timestamp"), "{message}");
                assert!(message.contains("line"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn frames_sorted_and_time_checked() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "d.json",
            r#"{"schema_version": 1, "scenes": [{"scene": "s", "frames": [
                {"frame_index": 1, "timestamp": 0.5, "detections": []},
                {"frame_index": 0, "timestamp": 0.0, "detections": []}]}]}"#,
        );
        let s = load_detections(&p).unwrap();
        assert_eq!(s[0].frames[0].frame_index, 0);
        let p = write(
            dir.path(),
            "bad.json",
            r#"{"schema_version": 1, "scenes": [{"scene": "s", "frames": [
                {"frame_index": 0, "timestamp": 1.0, "detections": []},
                {"frame_index": 1, "timestamp": 0.5, "detections": []}]}]}"#,
        );
        assert!(matches!(load_detections(&p), Err(Error::Validation { .. })));
    }

    #[test]
    fn wrong_schema_version() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "d.json", r#"{"schema_version": 7, "scenes": []}"#);
        assert!(matches!(load_detections(&p), Err(Error::Validation { .. })));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(load_detections(Path::new("/nonexistent/x.json")), Err(Error::Io { .. })));
    }
}
