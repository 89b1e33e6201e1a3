//! Domain types shared by every stage of the tracker: Gaussian densities,
//! Bernoulli track components, PMB/PMBM posteriors, detections and track
//! outputs.
//!
//! All types are plain values (`Clone + Send + Sync`). Stages never mutate a
//! posterior in place from the outside; they consume one and return the
//! successor.
//!
//! # Canonical JSON encoding
//!
//! Posterior snapshots serialize with `serde_json` as follows:
//!
//! * `GaussianDensity`: `{"mean": [x, y, vx, vy], "covariance": [[..4], ..4 rows]}`,
//!   covariance row-major.
//! * `GaussianMixture`: `{"components": [{"weight": w, "density": GaussianDensity}, ..]}`.
//! * `BernoulliComponent`: `{"existence", "density", "track_id" (integer or null),
//!   "last_score", "passthrough"}`.
//! * `PassthroughState`: `{"z", "size": [l, w, h], "yaw", "velocity": [vx, vy],
//!   "detection_score", "class_name"}` with `class_name` one of the snake-case
//!   class labels of [`ObjectClass`].
//! * `PmbPosterior`: `{"ppp", "bernoullis", "next_track_id", "frame_index", "birth_seeds",
//!   "last_timestamp"}` where `birth_seeds` are the `[x, y]` positions at which
//!   the next prediction places birth components.
//!
//! Floats are written with shortest round-trip formatting, so a
//! serialize/deserialize cycle reproduces every value bit for bit.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, SymmetricEigen, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Tolerance on the smallest eigenvalue of a covariance matrix.
pub const PSD_TOLERANCE: f64 = 1e-9;

/// Object classes tracked independently of each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectClass {
    Bicycle,
    Bus,
    Car,
    Motorcycle,
    Pedestrian,
    Trailer,
    Truck,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 7] = [
        ObjectClass::Bicycle,
        ObjectClass::Bus,
        ObjectClass::Car,
        ObjectClass::Motorcycle,
        ObjectClass::Pedestrian,
        ObjectClass::Trailer,
        ObjectClass::Truck,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectClass::Bicycle => "bicycle",
            ObjectClass::Bus => "bus",
            ObjectClass::Car => "car",
            ObjectClass::Motorcycle => "motorcycle",
            ObjectClass::Pedestrian => "pedestrian",
            ObjectClass::Trailer => "trailer",
            ObjectClass::Truck => "truck",
        }
    }

    pub fn known_names() -> String {
        Self::ALL
            .iter()
            .map(|c| c.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownClass {
                name: s.to_string(),
                known: Self::known_names(),
            })
    }
}

/// Gaussian density over the BEV state `(x, y, vx, vy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "GaussianRepr", into = "GaussianRepr")]
pub struct GaussianDensity {
    pub mean: Vector4<f64>,
    pub covariance: Matrix4<f64>,
}

#[derive(Serialize, Deserialize)]
struct GaussianRepr {
    mean: [f64; 4],
    covariance: [[f64; 4]; 4],
}

impl From<GaussianRepr> for GaussianDensity {
    fn from(r: GaussianRepr) -> Self {
        GaussianDensity {
            mean: Vector4::from(r.mean),
            covariance: Matrix4::from_fn(|i, j| r.covariance[i][j]),
        }
    }
}

impl From<GaussianDensity> for GaussianRepr {
    fn from(d: GaussianDensity) -> Self {
        let mut covariance = [[0.0; 4]; 4];
        for (i, row) in covariance.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = d.covariance[(i, j)];
            }
        }
        GaussianRepr {
            mean: d.mean.into(),
            covariance,
        }
    }
}

impl GaussianDensity {
    pub fn new(mean: Vector4<f64>, covariance: Matrix4<f64>) -> Self {
        GaussianDensity { mean, covariance }
    }

    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.mean[0], self.mean[1])
    }

    /// Checks the density invariants: finite mean, symmetric PSD covariance.
    pub fn validate(&self) -> Result<(), Error> {
        if !self.mean.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidDensity("mean is not finite".into()));
        }
        check_covariance(&self.covariance).map_err(Error::InvalidDensity)
    }
}

/// Symmetric positive semi-definite check with tolerance [`PSD_TOLERANCE`].
pub fn check_covariance(cov: &Matrix4<f64>) -> Result<(), String> {
    if !cov.iter().all(|v| v.is_finite()) {
        return Err("covariance is not finite".into());
    }
    let scale = cov.amax().max(1.0);
    for i in 0..4 {
        for j in (i + 1)..4 {
            if (cov[(i, j)] - cov[(j, i)]).abs() > PSD_TOLERANCE * scale {
                return Err(format!(
                    "covariance is not symmetric at ({i}, {j}): {} vs {}",
                    cov[(i, j)],
                    cov[(j, i)]
                ));
            }
        }
    }
    let min_eig = SymmetricEigen::new(*cov).eigenvalues.min();
    if min_eig < -PSD_TOLERANCE * scale {
        return Err(format!(
            "covariance is not positive semi-definite (eigenvalue {min_eig})"
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGaussian {
    pub weight: f64,
    pub density: GaussianDensity,
}

/// Unnormalized Gaussian mixture, used for Poisson intensities.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture {
    pub components: Vec<WeightedGaussian>,
}

impl GaussianMixture {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, weight: f64, density: GaussianDensity) {
        self.components.push(WeightedGaussian { weight, density });
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Expected number of points of the Poisson process, i.e. the integral
    /// of the intensity.
    pub fn expected_count(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }
}

/// Detector attributes carried alongside the filtered BEV state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassthroughState {
    pub z: f64,
    pub size: [f64; 3],
    pub yaw: f64,
    pub velocity: [f64; 2],
    pub detection_score: f64,
    pub class_name: ObjectClass,
}

/// One potential object: existence probability plus existence-conditioned
/// state density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BernoulliComponent {
    pub existence: f64,
    pub density: GaussianDensity,
    pub track_id: Option<u64>,
    /// Score of the most recent associated detection; used as the detection
    /// probability when the component is misdetected.
    pub last_score: f64,
    pub passthrough: PassthroughState,
}

/// PMB posterior: Poisson intensity for undetected objects plus the
/// multi-Bernoulli of the single propagated global hypothesis.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PmbPosterior {
    pub ppp: GaussianMixture,
    pub bernoullis: Vec<BernoulliComponent>,
    pub next_track_id: u64,
    /// Number of frames processed so far.
    pub frame_index: u64,
    /// Positions of last frame's measurements that were not explained by a
    /// pre-existing track; births for the next frame are centred there.
    #[serde(default)]
    pub birth_seeds: Vec<[f64; 2]>,
    /// Timestamp of the last processed frame.
    #[serde(default)]
    pub last_timestamp: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MbHypothesis {
    pub weight: f64,
    pub bernoullis: Vec<BernoulliComponent>,
}

/// PMBM posterior: shared Poisson part plus a weighted list of
/// multi-Bernoulli global hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmbmPosterior {
    pub ppp: GaussianMixture,
    pub hypotheses: Vec<MbHypothesis>,
    pub max_hypotheses: usize,
    pub next_track_id: u64,
    pub frame_index: u64,
    #[serde(default)]
    pub birth_seeds: Vec<[f64; 2]>,
    #[serde(default)]
    pub last_timestamp: Option<f64>,
}

impl PmbmPosterior {
    pub fn new(max_hypotheses: usize) -> Self {
        PmbmPosterior {
            ppp: GaussianMixture::new(),
            hypotheses: vec![MbHypothesis {
                weight: 1.0,
                bernoullis: Vec::new(),
            }],
            max_hypotheses,
            next_track_id: 0,
            frame_index: 0,
            birth_seeds: Vec::new(),
            last_timestamp: None,
        }
    }
}

/// A single detected box. Only `center` is filtered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub center: [f64; 2],
    pub passthrough: PassthroughState,
    pub frame_index: u64,
    pub timestamp: f64,
}

impl Detection {
    pub fn score(&self) -> f64 {
        self.passthrough.detection_score
    }

    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.center[0], self.center[1])
    }
}

/// All detections of one class in one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDetections {
    pub frame_index: u64,
    pub timestamp: f64,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackOutput {
    pub frame_index: u64,
    pub track_id: u64,
    pub center: [f64; 2],
    pub passthrough: PassthroughState,
    pub tracking_score: f64,
}

/// A broken posterior invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateTrackId(u64),
    ExistenceOutOfRange { index: usize, existence: f64 },
    LastScoreOutOfRange { index: usize, score: f64 },
    NextTrackIdTooSmall { next: u64, max_assigned: u64 },
    InvalidBernoulliDensity { index: usize, reason: String },
    InvalidPppComponent { index: usize, reason: String },
    NonPositiveSize { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateTrackId(id) => {
                write!(f, "track id uniqueness violated: id {id} appears more than once")
            }
            Violation::ExistenceOutOfRange { index, existence } => write!(
                f,
                "bernoulli {index}: existence {existence} outside [0, 1]"
            ),
            Violation::LastScoreOutOfRange { index, score } => {
                write!(f, "bernoulli {index}: last score {score} outside [0, 1]")
            }
            Violation::NextTrackIdTooSmall { next, max_assigned } => write!(
                f,
                "next track id {next} does not exceed assigned id {max_assigned}"
            ),
            Violation::InvalidBernoulliDensity { index, reason } => {
                write!(f, "bernoulli {index}: {reason}")
            }
            Violation::InvalidPppComponent { index, reason } => {
                write!(f, "ppp component {index}: {reason}")
            }
            Violation::NonPositiveSize { index } => {
                write!(f, "bernoulli {index}: passthrough size must be positive")
            }
        }
    }
}

fn in_unit(v: f64) -> bool {
    (0.0..=1.0).contains(&v)
}

/// Lists every invariant of `p` that does not hold. Empty means valid.
pub fn validate_posterior(p: &PmbPosterior) -> Vec<Violation> {
    let mut out = Vec::new();
    for (index, c) in p.ppp.components.iter().enumerate() {
        if !(c.weight >= 0.0 && c.weight.is_finite()) {
            out.push(Violation::InvalidPppComponent {
                index,
                reason: format!("weight {} is not a finite nonnegative number", c.weight),
            });
        }
        if let Err(e) = c.density.validate() {
            out.push(Violation::InvalidPppComponent {
                index,
                reason: e.to_string(),
            });
        }
    }
    out.extend(validate_bernoullis(&p.bernoullis, p.next_track_id));
    out
}

pub(crate) fn validate_bernoullis(bernoullis: &[BernoulliComponent], next_track_id: u64) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    let mut reported = BTreeSet::new();
    for (index, b) in bernoullis.iter().enumerate() {
        if !in_unit(b.existence) {
            out.push(Violation::ExistenceOutOfRange {
                index,
                existence: b.existence,
            });
        }
        if !in_unit(b.last_score) {
            out.push(Violation::LastScoreOutOfRange {
                index,
                score: b.last_score,
            });
        }
        if let Err(e) = b.density.validate() {
            out.push(Violation::InvalidBernoulliDensity {
                index,
                reason: e.to_string(),
            });
        }
        if b.passthrough.size.iter().any(|s| !(*s > 0.0)) {
            out.push(Violation::NonPositiveSize { index });
        }
        if let Some(id) = b.track_id {
            if !seen.insert(id) && reported.insert(id) {
                out.push(Violation::DuplicateTrackId(id));
            }
        }
    }
    if let Some(&max_assigned) = seen.iter().next_back() {
        if next_track_id <= max_assigned {
            out.push(Violation::NextTrackIdTooSmall {
                next: next_track_id,
                max_assigned,
            });
        }
    }
    out
}
