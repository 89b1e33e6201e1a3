//! Filter recursions: GNN-PMB, the PMBM baseline and an M/N-logic GNN
//! baseline.

mod gnn_pmb;
mod mn;
mod pmbm;
pub(crate) mod update;

pub use gnn_pmb::{assign_track_ids, extract, predict, prune, step, update, GnnPmbTracker};
pub use mn::{gnn_mn_baseline_step, MnParams, MnState, MnTrack};
pub use pmbm::{pmbm_step, PmbmTracker};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{make_birth_intensity, FieldOfView, MeasurementModel, ModelParams, Models, MotionModel};
use crate::state::{GaussianMixture, ObjectClass, TrackOutput};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterParams {
    #[serde(flatten)]
    pub model: ModelParams,
    pub detection_score_threshold: f64,
    pub nms_threshold: f64,
    pub extraction_threshold: f64,
    pub existence_pruning_threshold: f64,
    /// Local hypotheses with a likelihood below this are dropped.
    pub local_hypothesis_pruning_threshold: f64,
    pub ppp_weight_pruning_threshold: f64,
    /// Scale detection likelihoods by existence and detection probability.
    pub existence_weighted_costs: bool,
    /// Spacing of the birth grid used on the first frame [m].
    pub birth_grid_spacing: f64,
    /// Area covered by the first-frame birth grid. Without it the grid
    /// covers the first frame's detections padded by one grid spacing.
    pub birth_fov: Option<FieldOfView>,
    /// Time step used when timestamps do not advance [s].
    pub nominal_dt: f64,
    /// Acceleration noise [m/s²]; per-class default when unset.
    pub process_noise_scale: Option<f64>,
    /// Measurement noise standard deviation [m]; per-class default when unset.
    pub measurement_noise_std: Option<f64>,
}

impl Default for FilterParams {
    fn default() -> Self {
        FilterParams {
            model: ModelParams::default(),
            detection_score_threshold: 0.1,
            nms_threshold: 0.1,
            extraction_threshold: 0.7,
            existence_pruning_threshold: 1e-6,
            local_hypothesis_pruning_threshold: 1e-4,
            ppp_weight_pruning_threshold: 1e-3,
            existence_weighted_costs: true,
            birth_grid_spacing: 10.0,
            birth_fov: None,
            nominal_dt: 0.5,
            process_noise_scale: None,
            measurement_noise_std: None,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let unit = [
            ("detection_score_threshold", self.detection_score_threshold),
            ("nms_threshold", self.nms_threshold),
            ("extraction_threshold", self.extraction_threshold),
            ("existence_pruning_threshold", self.existence_pruning_threshold),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        for (name, v) in [
            ("local_hypothesis_pruning_threshold", self.local_hypothesis_pruning_threshold),
            ("ppp_weight_pruning_threshold", self.ppp_weight_pruning_threshold),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.extraction_threshold < self.existence_pruning_threshold {
            return Err(Error::InvalidParameter(format!(
                "extraction_threshold {} is below existence_pruning_threshold {}",
                self.extraction_threshold, self.existence_pruning_threshold
            )));
        }
        if !(self.birth_grid_spacing > 0.0) {
            return Err(Error::InvalidParameter("birth_grid_spacing must be > 0".into()));
        }
        if !(self.nominal_dt > 0.0) {
            return Err(Error::InvalidParameter("nominal_dt must be > 0".into()));
        }
        if let Some(fov) = &self.birth_fov {
            if !(fov.x_max >= fov.x_min && fov.y_max >= fov.y_min) {
                return Err(Error::InvalidParameter("birth_fov is empty".into()));
            }
        }
        Ok(())
    }

    pub fn models(&self, class: ObjectClass, dt: f64) -> Result<Models> {
        let q = self
            .process_noise_scale
            .unwrap_or_else(|| default_process_noise(class));
        let r = self
            .measurement_noise_std
            .unwrap_or_else(|| default_measurement_noise_std(class));
        Ok(Models {
            motion: MotionModel::new(dt, q)?,
            measurement: MeasurementModel::isotropic(r)?,
        })
    }
}

/// Acceleration standard deviation [m/s²].
pub fn default_process_noise(class: ObjectClass) -> f64 {
    match class {
        ObjectClass::Pedestrian | ObjectClass::Bicycle => 4.0,
        _ => 2.0,
    }
}

/// BEV position noise standard deviation [m].
pub fn default_measurement_noise_std(class: ObjectClass) -> f64 {
    match class {
        ObjectClass::Pedestrian | ObjectClass::Bicycle | ObjectClass::Motorcycle => 0.3,
        _ => 0.5,
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub gated_pairs: usize,
    pub new_bernoullis: usize,
    pub pruned_bernoullis: usize,
    pub pruned_ppp: usize,
    pub pruned_local_hypotheses: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    pub tracks: Vec<TrackOutput>,
    pub posterior: crate::state::PmbPosterior,
    pub diagnostics: Diagnostics,
}

/// Birth intensity for the next prediction: a grid on the first frame, the
/// previous frame's unexplained measurements afterwards.
pub(crate) fn birth_for_frame(
    frame_index: u64,
    seeds: &[[f64; 2]],
    detections: &[crate::state::Detection],
    params: &FilterParams,
) -> GaussianMixture {
    if frame_index > 0 {
        return make_birth_intensity(seeds, &params.model);
    }
    let fov = params.birth_fov.or_else(|| {
        let first = detections.first()?;
        let pad = params.birth_grid_spacing;
        let mut fov = FieldOfView {
            x_min: first.center[0],
            x_max: first.center[0],
            y_min: first.center[1],
            y_max: first.center[1],
        };
        for d in detections {
            fov.x_min = fov.x_min.min(d.center[0]);
            fov.x_max = fov.x_max.max(d.center[0]);
            fov.y_min = fov.y_min.min(d.center[1]);
            fov.y_max = fov.y_max.max(d.center[1]);
        }
        fov.x_min -= pad;
        fov.x_max += pad;
        fov.y_min -= pad;
        fov.y_max += pad;
        Some(fov)
    });
    match fov {
        Some(fov) => make_birth_intensity(&fov.grid(params.birth_grid_spacing), &params.model),
        None => GaussianMixture::new(),
    }
}

/// Time step for a frame at `timestamp` after one at `last`.
pub(crate) fn frame_dt(last: Option<f64>, timestamp: f64, params: &FilterParams) -> f64 {
    match last {
        Some(t) if timestamp - t > 0.0 => timestamp - t,
        _ => params.nominal_dt,
    }
}
