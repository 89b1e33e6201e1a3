//! Synthetic scenes drawn from the standard multi-object models: Poisson
//! births uniform in a rectangular field of view, Bernoulli survival,
//! constant-velocity motion driven by white acceleration noise, Bernoulli
//! detection with Gaussian position noise and Poisson clutter uniform in
//! the field of view. Each object yields at most one detection per frame and
//! objects leaving the field of view are terminated.

use std::path::Path;

use nalgebra::{Vector2, Vector4};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::schema::{GroundTruthFile, GroundTruthFrameRecord, GroundTruthObject, GroundTruthSceneRecord, SCHEMA_VERSION};
use crate::io::{detections_file, load_detections, load_ground_truth, write_json, SceneDetections};
use crate::models::{FieldOfView, MotionModel};
use crate::state::{Detection, FrameDetections, ObjectClass, PassthroughState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DetectionProbability {
    Constant { value: f64 },
    /// Drawn uniformly per object at birth.
    PerObject { min: f64, max: f64 },
}

/// Frames on which one object is forced to go undetected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dropout {
    /// Object index in order of appearance.
    pub object: usize,
    pub frames: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub name: String,
    pub fov: FieldOfView,
    /// Objects present on the first frame.
    pub initial_objects: usize,
    /// Mean number of births per frame after the first.
    pub birth_rate: f64,
    pub survival_probability: f64,
    pub detection_probability: DetectionProbability,
    /// Mean number of clutter detections per frame.
    pub clutter_rate: f64,
    pub measurement_noise_std: f64,
    pub acceleration_std: f64,
    /// Standard deviation of each velocity component at birth [m/s].
    pub initial_speed_std: f64,
    pub dt: f64,
    pub frames: u64,
    pub seed: u64,
    pub class: ObjectClass,
    pub true_score_range: [f64; 2],
    pub clutter_score_range: [f64; 2],
    pub dropouts: Vec<Dropout>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            name: "sim".into(),
            fov: FieldOfView {
                x_min: -50.0,
                x_max: 50.0,
                y_min: -50.0,
                y_max: 50.0,
            },
            initial_objects: 10,
            birth_rate: 0.0,
            survival_probability: 1.0,
            detection_probability: DetectionProbability::Constant { value: 0.9 },
            clutter_rate: 5.0,
            measurement_noise_std: 0.5,
            acceleration_std: 1.0,
            initial_speed_std: 3.0,
            dt: 0.5,
            frames: 40,
            seed: 0,
            class: ObjectClass::Car,
            true_score_range: [0.5, 1.0],
            clutter_score_range: [0.1, 0.5],
            dropouts: Vec::new(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.survival_probability) {
            return bad(format!("survival_probability must lie in [0, 1], got {}", self.survival_probability));
        }
        match self.detection_probability {
            DetectionProbability::Constant { value } if !unit(value) => {
                return bad(format!("detection probability must lie in [0, 1], got {value}"));
            }
            DetectionProbability::PerObject { min, max } if !(unit(min) && unit(max) && min <= max) => {
                return bad(format!("per-object detection probability range [{min}, {max}] is invalid"));
            }
            _ => {}
        }
        for (name, v) in [
            ("birth_rate", self.birth_rate),
            ("clutter_rate", self.clutter_rate),
            ("measurement_noise_std", self.measurement_noise_std),
            ("acceleration_std", self.acceleration_std),
            ("initial_speed_std", self.initial_speed_std),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        let f = &self.fov;
        if !(f.x_max > f.x_min && f.y_max > f.y_min) {
            return bad("fov must have positive area".into());
        }
        for (name, [lo, hi]) in [
            ("true_score_range", self.true_score_range),
            ("clutter_score_range", self.clutter_score_range),
        ] {
            if !(unit(lo) && unit(hi) && lo <= hi) {
                return bad(format!("{name} [{lo}, {hi}] must be an ordered range in [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Box size `[l, w, h]` and centre height used for a class.
pub fn class_shape(class: ObjectClass) -> ([f64; 3], f64) {
    match class {
        ObjectClass::Bicycle => ([1.8, 0.6, 1.3], 0.65),
        ObjectClass::Bus => ([11.0, 2.9, 3.5], 1.75),
        ObjectClass::Car => ([4.6, 1.9, 1.7], 0.85),
        ObjectClass::Motorcycle => ([2.1, 0.8, 1.5], 0.75),
        ObjectClass::Pedestrian => ([0.7, 0.7, 1.8], 0.9),
        ObjectClass::Trailer => ([12.0, 2.9, 3.9], 1.95),
        ObjectClass::Truck => ([6.9, 2.5, 2.8], 1.4),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub detections: Vec<FrameDetections>,
    pub ground_truth: Vec<GroundTruthFrameRecord>,
}

/// Origin of every detection of every frame: `Some(object index)` or
/// `None` for clutter. Parallel to [`Scenario::detections`].
pub type DetectionSources = Vec<Vec<Option<usize>>>;

struct Object {
    index: usize,
    state: Vector4<f64>,
    detection_probability: f64,
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> u64 {
    if mean <= 0.0 {
        0
    } else {
        Poisson::new(mean).expect("positive mean").sample(rng) as u64
    }
}

fn normal(rng: &mut ChaCha8Rng, std: f64) -> f64 {
    if std == 0.0 {
        0.0
    } else {
        Normal::new(0.0, std).expect("finite std").sample(rng)
    }
}

pub fn simulate(cfg: &SimConfig) -> Result<Scenario> {
    simulate_with_sources(cfg).map(|(s, _)| s)
}

pub fn simulate_with_sources(cfg: &SimConfig) -> Result<(Scenario, DetectionSources)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let motion = MotionModel::new(cfg.dt, cfg.acceleration_std)?;
    let f = motion.transition();
    let g = motion.noise_gain();
    let (size, z) = class_shape(cfg.class);
    let fov = cfg.fov;
    let mut alive: Vec<Object> = Vec::new();
    let mut n_objects = 0usize;
    let mut spawn = |rng: &mut ChaCha8Rng, n: u64, alive: &mut Vec<Object>| {
        for _ in 0..n {
            let x = uniform(rng, [fov.x_min, fov.x_max]);
            let y = uniform(rng, [fov.y_min, fov.y_max]);
            let vx = normal(rng, cfg.initial_speed_std);
            let vy = normal(rng, cfg.initial_speed_std);
            let detection_probability = match cfg.detection_probability {
                DetectionProbability::Constant { value } => value,
                DetectionProbability::PerObject { min, max } => uniform(rng, [min, max]),
            };
            alive.push(Object {
                index: n_objects,
                state: Vector4::new(x, y, vx, vy),
                detection_probability,
            });
            n_objects += 1;
        }
    };

    let mut detections = Vec::with_capacity(cfg.frames as usize);
    let mut ground_truth = Vec::with_capacity(cfg.frames as usize);
    let mut sources = Vec::with_capacity(cfg.frames as usize);
    for k in 0..cfg.frames {
        if k == 0 {
            spawn(&mut rng, cfg.initial_objects as u64, &mut alive);
        } else {
            let mut next = Vec::with_capacity(alive.len());
            for mut o in alive.drain(..) {
                if !rng.random_bool(cfg.survival_probability) {
                    continue;
                }
                let a = Vector2::new(normal(&mut rng, cfg.acceleration_std), normal(&mut rng, cfg.acceleration_std));
                o.state = f * o.state + g * a;
                if fov.contains(o.state[0], o.state[1]) {
                    next.push(o);
                }
            }
            alive = next;
            let births = poisson(&mut rng, cfg.birth_rate);
            spawn(&mut rng, births, &mut alive);
        }
        let timestamp = k as f64 * cfg.dt;
        let mut frame: Vec<(Option<usize>, Detection)> = Vec::new();
        let mut objects = Vec::with_capacity(alive.len());
        for o in &alive {
            let yaw = o.state[3].atan2(o.state[2]);
            objects.push(GroundTruthObject {
                translation: [o.state[0], o.state[1], z],
                size,
                rotation_yaw: yaw,
                velocity: [o.state[2], o.state[3]],
                instance_id: format!("{}-{}", cfg.name, o.index),
                tracking_name: cfg.class.to_string(),
            });
            let dropped = cfg.dropouts.iter().any(|d| d.object == o.index && d.frames.contains(&k));
            let detected = rng.random_bool(o.detection_probability);
            let nx = normal(&mut rng, cfg.measurement_noise_std);
            let ny = normal(&mut rng, cfg.measurement_noise_std);
            let score = uniform(&mut rng, cfg.true_score_range);
            if detected && !dropped {
                frame.push((
                    Some(o.index),
                    Detection {
                        center: [o.state[0] + nx, o.state[1] + ny],
                        passthrough: PassthroughState {
                            z,
                            size,
                            yaw,
                            velocity: [o.state[2], o.state[3]],
                            detection_score: score,
                            class_name: cfg.class,
                        },
                        frame_index: k,
                        timestamp,
                    },
                ));
            }
        }
        for _ in 0..poisson(&mut rng, cfg.clutter_rate) {
            let x = uniform(&mut rng, [fov.x_min, fov.x_max]);
            let y = uniform(&mut rng, [fov.y_min, fov.y_max]);
            let yaw = uniform(&mut rng, [-std::f64::consts::PI, std::f64::consts::PI]);
            let score = uniform(&mut rng, cfg.clutter_score_range);
            frame.push((
                None,
                Detection {
                    center: [x, y],
                    passthrough: PassthroughState {
                        z,
                        size,
                        yaw,
                        velocity: [0.0, 0.0],
                        detection_score: score,
                        class_name: cfg.class,
                    },
                    frame_index: k,
                    timestamp,
                },
            ));
        }
        frame.shuffle(&mut rng);
        let (src, dets): (Vec<_>, Vec<_>) = frame.into_iter().unzip();
        sources.push(src);
        detections.push(FrameDetections {
            frame_index: k,
            timestamp,
            detections: dets,
        });
        ground_truth.push(GroundTruthFrameRecord {
            frame_index: k,
            timestamp,
            objects,
        });
    }
    Ok((
        Scenario {
            name: cfg.name.clone(),
            detections,
            ground_truth,
        },
        sources,
    ))
}

impl Scenario {
    pub fn scene_detections(&self) -> SceneDetections {
        SceneDetections {
            scene: self.name.clone(),
            frames: self.detections.clone(),
        }
    }

    pub fn ground_truth_file(&self) -> GroundTruthFile {
        GroundTruthFile {
            schema_version: SCHEMA_VERSION,
            scenes: vec![GroundTruthSceneRecord {
                scene: self.name.clone(),
                frames: self.ground_truth.clone(),
            }],
        }
    }
}

/// Writes `detections.json` and `ground_truth.json` into `dir`.
pub fn write_scenario(dir: &Path, s: &Scenario) -> Result<()> {
    write_json(&dir.join("detections.json"), &detections_file(&[s.scene_detections()]))?;
    write_json(&dir.join("ground_truth.json"), &s.ground_truth_file())
}

pub fn read_scenario(dir: &Path) -> Result<Scenario> {
    let det_path = dir.join("detections.json");
    let gt_path = dir.join("ground_truth.json");
    let mut scenes = load_detections(&det_path)?;
    let mut gt = load_ground_truth(&gt_path)?;
    if scenes.len() != 1 || gt.scenes.len() != 1 {
        return Err(Error::Validation {
            path: dir.to_path_buf(),
            message: format!(
                "a scenario holds exactly one scene, found {} detection and {} ground-truth scenes",
                scenes.len(),
                gt.scenes.len()
            ),
        });
    }
    let det = scenes.remove(0);
    let gt = gt.scenes.remove(0);
    if det.scene != gt.scene {
        return Err(Error::Validation {
            path: dir.to_path_buf(),
            message: format!("scene names differ: `{}` vs `{}`", det.scene, gt.scene),
        });
    }
    Ok(Scenario {
        name: det.scene,
        detections: det.frames,
        ground_truth: gt.frames,
    })
}
