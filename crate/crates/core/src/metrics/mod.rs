//! Tracking evaluation: center-distance matching, CLEAR-style counts,
//! mostly-tracked/mostly-lost, and the recall-averaged AMOTA/AMOTP.
//!
//! Inputs are organised per class as scenes of ordered frames. Track and
//! ground-truth identities only need to be unique within a scene.

mod matching;
mod report;
mod sweep;

pub use matching::{accumulate, evaluate_at, match_frame, FrameMatch};
pub use report::{evaluate_classes, format_table, ClassMetrics, MetricsReport};
pub use sweep::{amota, amotp, recall_sweep, recall_targets, RecallSweep, SweepPoint};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    /// Largest BEV center distance of a valid match [m].
    pub match_distance: f64,
    /// Number of recall targets of the sweep.
    pub n_recalls: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            match_distance: 3.0,
            n_recalls: 40,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.match_distance > 0.0) {
            return Err(Error::Metrics(format!(
                "match_distance must be > 0, got {}",
                self.match_distance
            )));
        }
        if self.n_recalls < 2 {
            return Err(Error::Metrics(format!("n_recalls must be >= 2, got {}", self.n_recalls)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtBox {
    pub id: String,
    pub center: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredBox {
    pub id: String,
    pub center: [f64; 2],
    pub score: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalFrame {
    pub gt: Vec<GtBox>,
    pub pred: Vec<PredBox>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalScene {
    pub frames: Vec<EvalFrame>,
}

/// Accumulated counts over frames (and scenes).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FrameCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub ids: usize,
    pub frag: usize,
    pub gt: usize,
    /// Sum of BEV distances over true positives [m].
    pub distance_sum: f64,
    pub mt: usize,
    pub ml: usize,
    pub trajectories: usize,
}

impl FrameCounts {
    pub fn recall(&self) -> f64 {
        if self.gt == 0 {
            f64::NAN
        } else {
            self.tp as f64 / self.gt as f64
        }
    }
}

impl std::ops::AddAssign for FrameCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
        self.ids += o.ids;
        self.frag += o.frag;
        self.gt += o.gt;
        self.distance_sum += o.distance_sum;
        self.mt += o.mt;
        self.ml += o.ml;
        self.trajectories += o.trajectories;
    }
}

/// `1 - (FN + FP + IDS) / GT`, unclamped; NaN without ground truth.
pub fn mota(c: &FrameCounts) -> f64 {
    if c.gt == 0 {
        return f64::NAN;
    }
    1.0 - (c.fn_ + c.fp + c.ids) as f64 / c.gt as f64
}

/// Mean true-positive distance; NaN without true positives.
pub fn motp(distance_sum: f64, tp: usize) -> f64 {
    if tp == 0 {
        return f64::NAN;
    }
    distance_sum / tp as f64
}

/// MOTA normalised to recall `r`, clamped below at 0.
pub fn motar(c: &FrameCounts, r: f64, gt: usize) -> f64 {
    let gt = gt as f64;
    let err = (c.ids + c.fp + c.fn_) as f64 - (1.0 - r) * gt;
    (1.0 - err / (r * gt)).max(0.0)
}
