use crate::association::hungarian_solve;
use crate::error::Result;
use crate::models::{kalman_predict, Models};
use crate::preprocess::preprocess;
use crate::state::{
    BernoulliComponent, Detection, FrameDetections, GaussianMixture, ObjectClass, PmbPosterior, TrackOutput,
    WeightedGaussian,
};

use super::update::{remove_components, LocalHypotheses};
use super::{birth_for_frame, frame_dt, Diagnostics, FilterParams, FrameResult};

pub(crate) fn predict_bernoullis(
    bernoullis: &[BernoulliComponent],
    models: &Models,
    params: &FilterParams,
) -> Result<Vec<BernoulliComponent>> {
    let ps = params.model.survival_probability;
    bernoullis
        .iter()
        .map(|b| {
            Ok(BernoulliComponent {
                existence: b.existence * ps,
                density: kalman_predict(&b.density, &models.motion)?,
                ..b.clone()
            })
        })
        .collect()
}

pub(crate) fn predict_ppp(
    ppp: &GaussianMixture,
    birth: &GaussianMixture,
    models: &Models,
    params: &FilterParams,
) -> Result<GaussianMixture> {
    let ps = params.model.survival_probability;
    let mut components = ppp
        .components
        .iter()
        .map(|c| {
            Ok(WeightedGaussian {
                weight: c.weight * ps,
                density: kalman_predict(&c.density, &models.motion)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    components.extend(birth.components.iter().cloned());
    Ok(GaussianMixture { components })
}

/// Survivors of the PPP and the Bernoullis are predicted; `birth` is appended
/// to the PPP as is.
pub fn predict(
    p: &PmbPosterior,
    birth: &GaussianMixture,
    models: &Models,
    params: &FilterParams,
) -> Result<PmbPosterior> {
    Ok(PmbPosterior {
        ppp: predict_ppp(&p.ppp, birth, models, params)?,
        bernoullis: predict_bernoullis(&p.bernoullis, models, params)?,
        ..p.clone()
    })
}

/// Update with the single most likely global hypothesis. New Bernoullis are
/// appended without a track ID; see [`assign_track_ids`].
pub fn update(
    p: &PmbPosterior,
    detections: &[Detection],
    models: &Models,
    params: &FilterParams,
) -> Result<PmbPosterior> {
    Ok(update_inner(p, detections, models, params)?.0)
}

fn update_inner(
    p: &PmbPosterior,
    detections: &[Detection],
    models: &Models,
    params: &FilterParams,
) -> Result<(PmbPosterior, Diagnostics)> {
    let lh = LocalHypotheses::build(&p.ppp, &p.bernoullis, detections, models, params)?;
    let h = hungarian_solve(&lh.costs)?;
    let applied = lh.apply(&p.bernoullis, detections, &h, params);
    let diagnostics = Diagnostics {
        gated_pairs: lh.gated_pairs,
        new_bernoullis: applied.new_from.len(),
        pruned_local_hypotheses: applied.pruned_local,
        ..Default::default()
    };
    let posterior = PmbPosterior {
        ppp: remove_components(&p.ppp, &applied.consumed_ppp),
        bernoullis: applied.bernoullis,
        birth_seeds: applied.birth_seeds,
        ..p.clone()
    };
    Ok((posterior, diagnostics))
}

/// Gives every Bernoulli without an ID the next free one, in list order.
pub fn assign_track_ids(p: &PmbPosterior) -> PmbPosterior {
    let mut out = p.clone();
    for b in &mut out.bernoullis {
        if b.track_id.is_none() {
            b.track_id = Some(out.next_track_id);
            out.next_track_id += 1;
        }
    }
    out
}

pub(crate) fn prune_bernoullis(bernoullis: &mut Vec<BernoulliComponent>, threshold: f64) -> usize {
    let before = bernoullis.len();
    bernoullis.retain(|b| b.existence >= threshold);
    before - bernoullis.len()
}

pub(crate) fn prune_ppp(ppp: &mut GaussianMixture, threshold: f64) -> usize {
    let before = ppp.len();
    ppp.components.retain(|c| c.weight >= threshold);
    before - ppp.len()
}

pub fn prune(p: &PmbPosterior, params: &FilterParams) -> PmbPosterior {
    let mut out = p.clone();
    prune_bernoullis(&mut out.bernoullis, params.existence_pruning_threshold);
    prune_ppp(&mut out.ppp, params.ppp_weight_pruning_threshold);
    out
}

pub(crate) fn extract_from(
    bernoullis: &[BernoulliComponent],
    params: &FilterParams,
    frame_index: u64,
) -> Vec<TrackOutput> {
    bernoullis
        .iter()
        .filter(|b| b.existence >= params.extraction_threshold)
        .filter_map(|b| {
            Some(TrackOutput {
                frame_index,
                track_id: b.track_id?,
                center: [b.density.mean[0], b.density.mean[1]],
                passthrough: b.passthrough.clone(),
                tracking_score: b.passthrough.detection_score,
            })
        })
        .collect()
}

/// Tracks whose existence reaches the extraction threshold.
pub fn extract(p: &PmbPosterior, params: &FilterParams, frame_index: u64) -> Vec<TrackOutput> {
    extract_from(&p.bernoullis, params, frame_index)
}

/// One full recursion: predict, update, assign IDs, prune, extract.
pub fn step(
    p: &PmbPosterior,
    frame: &FrameDetections,
    models: &Models,
    params: &FilterParams,
) -> Result<FrameResult> {
    let birth = birth_for_frame(p.frame_index, &p.birth_seeds, &frame.detections, params);
    let predicted = predict(p, &birth, models, params)?;
    let (updated, mut diagnostics) = update_inner(&predicted, &frame.detections, models, params)?;
    let mut posterior = assign_track_ids(&updated);
    diagnostics.pruned_bernoullis = prune_bernoullis(&mut posterior.bernoullis, params.existence_pruning_threshold);
    diagnostics.pruned_ppp = prune_ppp(&mut posterior.ppp, params.ppp_weight_pruning_threshold);
    let tracks = extract(&posterior, params, frame.frame_index);
    posterior.frame_index += 1;
    posterior.last_timestamp = Some(frame.timestamp);
    Ok(FrameResult {
        tracks,
        posterior,
        diagnostics,
    })
}

/// Runs the GNN-PMB filter over a stream of frames of one class, including
/// detection preprocessing and per-frame model construction.
#[derive(Debug, Clone)]
pub struct GnnPmbTracker {
    class: ObjectClass,
    params: FilterParams,
    posterior: PmbPosterior,
}

impl GnnPmbTracker {
    pub fn new(class: ObjectClass, params: FilterParams) -> Result<Self> {
        params.validate()?;
        Ok(GnnPmbTracker {
            class,
            params,
            posterior: PmbPosterior::default(),
        })
    }

    /// Resumes tracking from a saved posterior.
    pub fn with_posterior(class: ObjectClass, params: FilterParams, posterior: PmbPosterior) -> Result<Self> {
        params.validate()?;
        Ok(GnnPmbTracker {
            class,
            params,
            posterior,
        })
    }

    pub fn posterior(&self) -> &PmbPosterior {
        &self.posterior
    }

    pub fn process(&mut self, frame: &FrameDetections) -> Result<FrameResult> {
        let detections = preprocess(
            &frame.detections,
            self.params.detection_score_threshold,
            self.params.nms_threshold,
        );
        let dt = frame_dt(self.posterior.last_timestamp, frame.timestamp, &self.params);
        let models = self.params.models(self.class, dt)?;
        let frame = FrameDetections {
            frame_index: frame.frame_index,
            timestamp: frame.timestamp,
            detections,
        };
        let result = step(&self.posterior, &frame, &models, &self.params)?;
        self.posterior = result.posterior.clone();
        Ok(result)
    }
}
