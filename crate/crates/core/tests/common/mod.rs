#![allow(dead_code)]

use gnnpmb::filter::{FilterParams, GnnPmbTracker, PmbmTracker};
use gnnpmb::metrics::{EvalFrame, EvalScene, GtBox, PredBox};
use gnnpmb::sim::Scenario;
use gnnpmb::state::{ObjectClass, TrackOutput};

pub fn track_gnn(s: &Scenario, class: ObjectClass, params: &FilterParams) -> Vec<Vec<TrackOutput>> {
    let mut t = GnnPmbTracker::new(class, params.clone()).unwrap();
    s.detections.iter().map(|f| t.process(f).unwrap().tracks).collect()
}

pub fn track_pmbm(s: &Scenario, class: ObjectClass, params: &FilterParams, n_h: usize) -> Vec<Vec<TrackOutput>> {
    let mut t = PmbmTracker::new(class, params.clone(), n_h).unwrap();
    s.detections.iter().map(|f| t.process(f).unwrap()).collect()
}

pub fn eval_scene(s: &Scenario, outputs: &[Vec<TrackOutput>]) -> EvalScene {
    EvalScene {
        frames: s
            .ground_truth
            .iter()
            .zip(outputs)
            .map(|(g, tracks)| EvalFrame {
                gt: g
                    .objects
                    .iter()
                    .map(|o| GtBox {
                        id: o.instance_id.clone(),
                        center: [o.translation[0], o.translation[1]],
                    })
                    .collect(),
                pred: tracks
                    .iter()
                    .map(|t| PredBox {
                        id: t.track_id.to_string(),
                        center: t.center,
                        score: t.tracking_score,
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Track ID of the output nearest to ground-truth object `instance_id`
/// in frame `k`, if one lies within `radius`.
pub fn id_near(s: &Scenario, outputs: &[Vec<TrackOutput>], k: usize, instance_id: &str, radius: f64) -> Option<u64> {
    let o = s.ground_truth[k].objects.iter().find(|o| o.instance_id == instance_id)?;
    outputs[k]
        .iter()
        .map(|t| ((t.center[0] - o.translation[0]).hypot(t.center[1] - o.translation[1]), t.track_id))
        .filter(|(d, _)| *d <= radius)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, id)| id)
}
