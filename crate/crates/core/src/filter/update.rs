//! Local hypotheses of one update and the application of a selected global
//! hypothesis, shared by the GNN-PMB and PMBM recursions.

use std::collections::BTreeSet;

use nalgebra::{Matrix4, Vector4};

use crate::association::{CostMatrix, GlobalHypothesis, MeasurementOutcome, TrackOutcome};
use crate::error::Result;
use crate::models::{clutter_intensity, gate_with, update_with, Innovation, Models};
use crate::state::{BernoulliComponent, Detection, GaussianDensity, GaussianMixture};

use super::FilterParams;

/// Floor applied to misdetection and new-track likelihoods so that every
/// track can always be missed and every measurement can always start a
/// track.
pub(crate) const MIN_LIKELIHOOD: f64 = 1e-300;

pub(crate) struct LocalHypotheses {
    pub costs: CostMatrix,
    /// Updated density of track `j` given measurement `i`, when gated.
    detected: Vec<Vec<Option<GaussianDensity>>>,
    missed_existence: Vec<f64>,
    miss_likelihood: Vec<f64>,
    new_track_likelihood: Vec<f64>,
    /// Candidate new Bernoulli per measurement; existence 0 when no PPP
    /// component gates it.
    new_tracks: Vec<BernoulliComponent>,
    ppp_gated: Vec<Vec<usize>>,
    pub gated_pairs: usize,
}

impl LocalHypotheses {
    pub fn build(
        ppp: &GaussianMixture,
        bernoullis: &[BernoulliComponent],
        detections: &[Detection],
        models: &Models,
        params: &FilterParams,
    ) -> Result<Self> {
        let mm = &models.measurement;
        let p = detections.len();
        let n = bernoullis.len();
        let gate = params.model.gating_threshold;
        let log_thr = params.local_hypothesis_pruning_threshold.ln();
        let lambda_c = clutter_intensity(&params.model)?;

        let mut detection_cost = vec![vec![f64::INFINITY; n]; p];
        let mut detected = vec![vec![None; n]; p];
        let mut misdetection = Vec::with_capacity(n);
        let mut missed_existence = Vec::with_capacity(n);
        let mut miss_likelihood = Vec::with_capacity(n);
        let mut gated_pairs = 0;

        for (j, b) in bernoullis.iter().enumerate() {
            b.density.validate()?;
            let innov = Innovation::new(&b.density, mm)?;
            for i in gate_with(&innov, detections, gate) {
                gated_pairs += 1;
                let det = &detections[i];
                let (post, ll) = update_with(&b.density, &innov, &det.position(), mm);
                let log_w = if params.existence_weighted_costs {
                    b.existence.ln() + det.score().ln() + ll
                } else {
                    ll
                };
                if log_w >= log_thr {
                    detection_cost[i][j] = -log_w;
                    detected[i][j] = Some(post);
                }
            }
            let pd = b.last_score;
            let w = 1.0 - b.existence + b.existence * (1.0 - pd);
            miss_likelihood.push(w);
            misdetection.push(-w.max(MIN_LIKELIHOOD).ln());
            missed_existence.push(if w > 0.0 { b.existence * (1.0 - pd) / w } else { 0.0 });
        }

        let ppp_innov = ppp
            .components
            .iter()
            .map(|c| {
                c.density.validate()?;
                Innovation::new(&c.density, mm)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut ppp_gated = vec![Vec::new(); p];
        let mut terms: Vec<Vec<(f64, GaussianDensity)>> = vec![Vec::new(); p];
        for (k, comp) in ppp.components.iter().enumerate() {
            for i in gate_with(&ppp_innov[k], detections, gate) {
                let det = &detections[i];
                let (post, ll) = update_with(&comp.density, &ppp_innov[k], &det.position(), mm);
                ppp_gated[i].push(k);
                terms[i].push((comp.weight * det.score() * ll.exp(), post));
            }
        }

        let mut new_track = Vec::with_capacity(p);
        let mut new_track_likelihood = Vec::with_capacity(p);
        let mut new_tracks = Vec::with_capacity(p);
        for (i, det) in detections.iter().enumerate() {
            let detected_mass: f64 = terms[i].iter().map(|(w, _)| w).sum();
            let rho = lambda_c + detected_mass;
            new_track_likelihood.push(rho);
            new_track.push(-rho.max(MIN_LIKELIHOOD).ln());
            let (existence, density) = if detected_mass > 0.0 {
                (detected_mass / rho, moment_match(&terms[i]))
            } else {
                let mut mean = Vector4::zeros();
                mean[0] = det.center[0];
                mean[1] = det.center[1];
                let cov = Matrix4::identity() * params.model.birth_covariance;
                (0.0, GaussianDensity::new(mean, cov))
            };
            new_tracks.push(BernoulliComponent {
                existence,
                density,
                track_id: None,
                last_score: det.score(),
                passthrough: det.passthrough.clone(),
            });
        }

        Ok(LocalHypotheses {
            costs: CostMatrix::new(detection_cost, misdetection, new_track, None)?,
            detected,
            missed_existence,
            miss_likelihood,
            new_track_likelihood,
            new_tracks,
            ppp_gated,
            gated_pairs,
        })
    }

    /// Bernoullis implied by `h`: existing tracks in their original order
    /// followed by new tracks in measurement order.
    pub fn apply(
        &self,
        bernoullis: &[BernoulliComponent],
        detections: &[Detection],
        h: &GlobalHypothesis,
        params: &FilterParams,
    ) -> Applied {
        let thr = params.local_hypothesis_pruning_threshold;
        let mut out = Vec::with_capacity(bernoullis.len() + detections.len());
        let mut pruned_local = 0;
        for (j, (b, outcome)) in bernoullis.iter().zip(&h.tracks).enumerate() {
            match *outcome {
                TrackOutcome::Detected(i) => {
                    let det = &detections[i];
                    let density = self.detected[i][j]
                        .clone()
                        .expect("selected pairing is gated");
                    out.push(BernoulliComponent {
                        existence: 1.0,
                        density,
                        track_id: b.track_id,
                        last_score: det.score(),
                        passthrough: det.passthrough.clone(),
                    });
                }
                TrackOutcome::Misdetected => {
                    if self.miss_likelihood[j] < thr {
                        pruned_local += 1;
                        continue;
                    }
                    let mut b = b.clone();
                    b.existence = self.missed_existence[j];
                    out.push(b);
                }
            }
        }
        let mut new_from = Vec::new();
        let mut consumed = BTreeSet::new();
        let mut seeds = Vec::new();
        for (i, outcome) in h.measurements.iter().enumerate() {
            if matches!(outcome, MeasurementOutcome::Track(_)) {
                continue;
            }
            seeds.push(detections[i].center);
            if *outcome != MeasurementOutcome::NewTrack {
                continue;
            }
            consumed.extend(self.ppp_gated[i].iter().copied());
            if self.new_track_likelihood[i] < thr {
                pruned_local += 1;
                continue;
            }
            if self.new_tracks[i].existence > 0.0 {
                new_from.push(i);
                out.push(self.new_tracks[i].clone());
            }
        }
        Applied {
            bernoullis: out,
            new_from,
            consumed_ppp: consumed,
            birth_seeds: seeds,
            pruned_local,
        }
    }
}

pub(crate) struct Applied {
    pub bernoullis: Vec<BernoulliComponent>,
    /// Measurement index of each new Bernoulli, in list order.
    pub new_from: Vec<usize>,
    pub consumed_ppp: BTreeSet<usize>,
    pub birth_seeds: Vec<[f64; 2]>,
    pub pruned_local: usize,
}

/// Single Gaussian with the first two moments of a weighted mixture.
pub(crate) fn moment_match(terms: &[(f64, GaussianDensity)]) -> GaussianDensity {
    let total: f64 = terms.iter().map(|(w, _)| w).sum();
    let mean = terms
        .iter()
        .fold(Vector4::zeros(), |acc, (w, d)| acc + d.mean * (*w / total));
    let cov = terms.iter().fold(Matrix4::zeros(), |acc, (w, d)| {
        let e = d.mean - mean;
        acc + (d.covariance + e * e.transpose()) * (*w / total)
    });
    GaussianDensity::new(mean, (cov + cov.transpose()) * 0.5)
}

/// PPP with the listed components removed.
pub(crate) fn remove_components(ppp: &GaussianMixture, consumed: &BTreeSet<usize>) -> GaussianMixture {
    GaussianMixture {
        components: ppp
            .components
            .iter()
            .enumerate()
            .filter(|(k, _)| !consumed.contains(k))
            .map(|(_, c)| c.clone())
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector4;

    #[test]
    fn moment_match_of_two_points() {
        let a = GaussianDensity::new(Vector4::new(-1.0, 0.0, 0.0, 0.0), Matrix4::identity());
        let b = GaussianDensity::new(Vector4::new(1.0, 0.0, 0.0, 0.0), Matrix4::identity());
        let m = moment_match(&[(1.0, a), (1.0, b)]);
        assert_eq!(m.mean, Vector4::zeros());
        assert!((m.covariance[(0, 0)] - 2.0).abs() < 1e-15);
        assert!((m.covariance[(1, 1)] - 1.0).abs() < 1e-15);
    }
}
