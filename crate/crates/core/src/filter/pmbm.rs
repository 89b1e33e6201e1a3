use std::collections::BTreeMap;

use crate::association::{murty_kbest, GlobalHypothesis};
use crate::error::{Error, Result};
use crate::models::Models;
use crate::preprocess::preprocess;
use crate::state::{FrameDetections, MbHypothesis, ObjectClass, PmbmPosterior, TrackOutput};

use super::gnn_pmb::{extract_from, predict_bernoullis, predict_ppp, prune_bernoullis, prune_ppp};
use super::update::{remove_components, Applied, LocalHypotheses};
use super::{birth_for_frame, frame_dt, FilterParams};

struct Child {
    log_weight: f64,
    parent: usize,
    rank: usize,
    hypothesis: GlobalHypothesis,
}

/// One PMBM recursion keeping at most `p.max_hypotheses` global hypotheses.
/// Each prior hypothesis of weight `w` spawns its `ceil(N_h * w)` best
/// children; estimates come from the most likely posterior hypothesis.
pub fn pmbm_step(
    p: &PmbmPosterior,
    frame: &FrameDetections,
    models: &Models,
    params: &FilterParams,
) -> Result<(Vec<TrackOutput>, PmbmPosterior)> {
    let cap = p.max_hypotheses;
    if cap == 0 {
        return Err(Error::InvalidParameter("max_hypotheses must be at least 1".into()));
    }
    let detections = &frame.detections;
    let birth = birth_for_frame(p.frame_index, &p.birth_seeds, detections, params);
    let ppp = predict_ppp(&p.ppp, &birth, models, params)?;
    let priors = p
        .hypotheses
        .iter()
        .map(|h| predict_bernoullis(&h.bernoullis, models, params))
        .collect::<Result<Vec<_>>>()?;

    let mut locals = Vec::with_capacity(priors.len());
    let mut children = Vec::new();
    for (j, (prior, bernoullis)) in p.hypotheses.iter().zip(&priors).enumerate() {
        let lh = LocalHypotheses::build(&ppp, bernoullis, detections, models, params)?;
        let k = ((cap as f64) * prior.weight).ceil().max(1.0) as usize;
        for (rank, h) in murty_kbest(&lh.costs, k)?.into_iter().enumerate() {
            children.push(Child {
                log_weight: prior.weight.ln() - h.cost,
                parent: j,
                rank,
                hypothesis: h,
            });
        }
        locals.push(lh);
    }
    if children.is_empty() {
        return Err(Error::Infeasible);
    }
    children.sort_by(|a, b| {
        b.log_weight
            .total_cmp(&a.log_weight)
            .then(a.parent.cmp(&b.parent))
            .then(a.rank.cmp(&b.rank))
    });
    children.truncate(cap);
    let max_log = children[0].log_weight;
    let norm: f64 = children.iter().map(|c| (c.log_weight - max_log).exp()).sum();

    let applied: Vec<Applied> = children
        .iter()
        .map(|c| locals[c.parent].apply(&priors[c.parent], detections, &c.hypothesis, params))
        .collect();

    // A measurement that starts a track gets the same ID in every hypothesis
    // that keeps that track; IDs go out in measurement order.
    let mut next_track_id = p.next_track_id;
    let mut ids = BTreeMap::new();
    for i in 0..detections.len() {
        if applied.iter().any(|a| a.new_from.contains(&i)) {
            ids.insert(i, next_track_id);
            next_track_id += 1;
        }
    }

    let mut hypotheses = Vec::with_capacity(children.len());
    for (c, a) in children.iter().zip(&applied) {
        let mut bernoullis = a.bernoullis.clone();
        let first_new = bernoullis.len() - a.new_from.len();
        for (b, i) in bernoullis[first_new..].iter_mut().zip(&a.new_from) {
            b.track_id = Some(ids[i]);
        }
        prune_bernoullis(&mut bernoullis, params.existence_pruning_threshold);
        hypotheses.push(MbHypothesis {
            weight: (c.log_weight - max_log).exp() / norm,
            bernoullis,
        });
    }

    let best = &applied[0];
    let mut ppp = remove_components(&ppp, &best.consumed_ppp);
    prune_ppp(&mut ppp, params.ppp_weight_pruning_threshold);
    let tracks = extract_from(&hypotheses[0].bernoullis, params, frame.frame_index);
    let posterior = PmbmPosterior {
        ppp,
        hypotheses,
        max_hypotheses: cap,
        next_track_id,
        frame_index: p.frame_index + 1,
        birth_seeds: best.birth_seeds.clone(),
        last_timestamp: Some(frame.timestamp),
    };
    Ok((tracks, posterior))
}

/// Stream driver for [`pmbm_step`], mirroring [`super::GnnPmbTracker`].
#[derive(Debug, Clone)]
pub struct PmbmTracker {
    class: ObjectClass,
    params: FilterParams,
    posterior: PmbmPosterior,
}

impl PmbmTracker {
    pub fn new(class: ObjectClass, params: FilterParams, max_hypotheses: usize) -> Result<Self> {
        params.validate()?;
        if max_hypotheses == 0 {
            return Err(Error::InvalidParameter("max_hypotheses must be at least 1".into()));
        }
        Ok(PmbmTracker {
            class,
            params,
            posterior: PmbmPosterior::new(max_hypotheses),
        })
    }

    pub fn posterior(&self) -> &PmbmPosterior {
        &self.posterior
    }

    pub fn process(&mut self, frame: &FrameDetections) -> Result<Vec<TrackOutput>> {
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
        let (tracks, posterior) = pmbm_step(&self.posterior, &frame, &models, &self.params)?;
        self.posterior = posterior;
        Ok(tracks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::GnnPmbTracker;
    use crate::state::fixtures::detection;
    use crate::state::{validate_posterior, Detection, PmbPosterior};

    fn frames(objects: &[(f64, f64, f64)], n: u64, miss: impl Fn(u64, usize) -> bool) -> Vec<FrameDetections> {
        (0..n)
            .map(|k| {
                let detections: Vec<Detection> = objects
                    .iter()
                    .enumerate()
                    .filter(|(o, _)| !miss(k, *o))
                    .map(|(_, &(x, y, vx))| detection(x + vx * 0.5 * k as f64, y, 0.8))
                    .collect();
                FrameDetections {
                    frame_index: k,
                    timestamp: 0.5 * k as f64,
                    detections,
                }
            })
            .collect()
    }

    #[test]
    fn single_hypothesis_matches_gnn() {
        let fs = frames(&[(0.0, 0.0, 2.0), (1.5, 1.0, -1.0), (30.0, 5.0, 0.0)], 15, |k, o| (k + o as u64) % 5 == 3);
        let params = FilterParams::default();
        let mut gnn = GnnPmbTracker::new(ObjectClass::Car, params.clone()).unwrap();
        let mut pmbm = PmbmTracker::new(ObjectClass::Car, params, 1).unwrap();
        for f in &fs {
            let a = gnn.process(f).unwrap().tracks;
            let b = pmbm.process(f).unwrap();
            assert_eq!(a, b);
            let post = pmbm.posterior();
            assert_eq!(post.hypotheses.len(), 1);
            let as_pmb = PmbPosterior {
                ppp: post.ppp.clone(),
                bernoullis: post.hypotheses[0].bernoullis.clone(),
                next_track_id: post.next_track_id,
                frame_index: post.frame_index,
                birth_seeds: post.birth_seeds.clone(),
                last_timestamp: post.last_timestamp,
            };
            assert_eq!(&as_pmb, gnn.posterior());
        }
    }

    #[test]
    fn weights_normalized_and_capped() {
        let fs = frames(&[(0.0, 0.0, 2.0), (2.0, 0.5, 1.5), (4.0, -0.5, 1.0)], 12, |k, o| (k * 3 + o as u64) % 4 == 0);
        let mut pmbm = PmbmTracker::new(ObjectClass::Car, FilterParams::default(), 20).unwrap();
        for f in &fs {
            pmbm.process(f).unwrap();
            let post = pmbm.posterior();
            assert!(post.hypotheses.len() <= 20);
            let total: f64 = post.hypotheses.iter().map(|h| h.weight).sum();
            assert!((total - 1.0).abs() < 1e-9);
            for h in &post.hypotheses {
                assert!(crate::state::validate_bernoullis(&h.bernoullis, post.next_track_id).is_empty());
            }
        }
    }

    #[test]
    fn clean_stream_many_hypotheses_same_track() {
        let fs = frames(&[(0.0, 0.0, 2.0)], 10, |_, _| false);
        let params = FilterParams::default();
        let mut gnn = GnnPmbTracker::new(ObjectClass::Car, params.clone()).unwrap();
        let mut pmbm = PmbmTracker::new(ObjectClass::Car, params, 100).unwrap();
        let mut ids = std::collections::BTreeSet::new();
        for f in &fs {
            let a = gnn.process(f).unwrap().tracks;
            let b = pmbm.process(f).unwrap();
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert!((x.center[0] - y.center[0]).abs() < 1e-9);
                ids.insert(y.track_id);
            }
        }
        assert_eq!(ids.len(), 1);
        assert!(validate_posterior(gnn.posterior()).is_empty());
    }
}
