//! Vector-type GNN tracker with M-out-of-N track confirmation.

use std::collections::VecDeque;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::association::linear_sum_assignment;
use crate::error::{Error, Result};
use crate::models::{kalman_predict, update_with, Innovation, Models};
use crate::state::{FrameDetections, GaussianDensity, PassthroughState, TrackOutput};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MnParams {
    /// Hits needed within the window to confirm a track.
    pub m: usize,
    /// Window length; also the number of consecutive misses that ends a track.
    pub n: usize,
    pub gating_threshold: f64,
    /// Initial velocity variance of a new track [m²/s²].
    pub initial_velocity_variance: f64,
}

impl Default for MnParams {
    fn default() -> Self {
        MnParams {
            m: 2,
            n: 3,
            gating_threshold: 40f64.sqrt(),
            initial_velocity_variance: 15.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnTrack {
    pub track_id: u64,
    pub density: GaussianDensity,
    /// Hit/miss record of the last `n` frames, newest last.
    pub hits: VecDeque<bool>,
    pub consecutive_misses: usize,
    pub confirmed: bool,
    pub passthrough: PassthroughState,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MnState {
    pub tracks: Vec<MnTrack>,
    pub next_track_id: u64,
}

impl MnTrack {
    fn record(&mut self, hit: bool, mn: &MnParams) {
        self.hits.push_back(hit);
        while self.hits.len() > mn.n {
            self.hits.pop_front();
        }
        self.consecutive_misses = if hit { 0 } else { self.consecutive_misses + 1 };
        if self.hits.iter().filter(|h| **h).count() >= mn.m {
            self.confirmed = true;
        }
    }
}

/// One frame of the M/N baseline. Tracks and detections are paired by a
/// Hungarian assignment on squared Mahalanobis distance, with a per-track
/// "no detection" option costing the squared gate. Reports confirmed tracks
/// detected in this frame.
pub fn gnn_mn_baseline_step(
    state: &MnState,
    frame: &FrameDetections,
    models: &Models,
    mn: &MnParams,
) -> Result<(Vec<TrackOutput>, MnState)> {
    if mn.m == 0 || mn.m > mn.n {
        return Err(Error::InvalidParameter(format!("need 1 <= M <= N, got M={} N={}", mn.m, mn.n)));
    }
    let detections = &frame.detections;
    let nt = state.tracks.len();
    let nd = detections.len();
    let gate2 = mn.gating_threshold * mn.gating_threshold;
    let mm = &models.measurement;

    let mut predicted = Vec::with_capacity(nt);
    let mut innovations = Vec::with_capacity(nt);
    for t in &state.tracks {
        let d = kalman_predict(&t.density, &models.motion)?;
        innovations.push(Innovation::new(&d, mm)?);
        predicted.push(d);
    }
    let cost: Vec<Vec<f64>> = innovations
        .iter()
        .enumerate()
        .map(|(i, innov)| {
            let mut row = vec![f64::INFINITY; nd + nt];
            for (j, det) in detections.iter().enumerate() {
                let d2 = innov.squared_distance(&det.position());
                if d2 <= gate2 {
                    row[j] = d2;
                }
            }
            row[nd + i] = gate2;
            row
        })
        .collect();
    let assignment = linear_sum_assignment(&cost, nd + nt).ok_or(Error::Infeasible)?;

    let mut next = MnState {
        tracks: Vec::with_capacity(nt + nd),
        next_track_id: state.next_track_id,
    };
    let mut used = vec![false; nd];
    for (i, t) in state.tracks.iter().enumerate() {
        let mut t = t.clone();
        let col = assignment[i];
        if col < nd {
            used[col] = true;
            let det = &detections[col];
            t.density = update_with(&predicted[i], &innovations[i], &det.position(), mm).0;
            t.passthrough = det.passthrough.clone();
            t.record(true, mn);
        } else {
            t.density = predicted[i].clone();
            t.record(false, mn);
        }
        if t.consecutive_misses < mn.n {
            next.tracks.push(t);
        }
    }
    let r = mm.noise();
    for (j, det) in detections.iter().enumerate() {
        if used[j] {
            continue;
        }
        let mut cov = Matrix4::zeros();
        cov.fixed_view_mut::<2, 2>(0, 0).copy_from(r);
        cov[(2, 2)] = mn.initial_velocity_variance;
        cov[(3, 3)] = mn.initial_velocity_variance;
        let mut t = MnTrack {
            track_id: next.next_track_id,
            density: GaussianDensity::new(Vector4::new(det.center[0], det.center[1], 0.0, 0.0), cov),
            hits: VecDeque::new(),
            consecutive_misses: 0,
            confirmed: false,
            passthrough: det.passthrough.clone(),
        };
        next.next_track_id += 1;
        t.record(true, mn);
        next.tracks.push(t);
    }

    let outputs = next
        .tracks
        .iter()
        .filter(|t| t.confirmed && t.consecutive_misses == 0)
        .map(|t| TrackOutput {
            frame_index: frame.frame_index,
            track_id: t.track_id,
            center: [t.density.mean[0], t.density.mean[1]],
            passthrough: t.passthrough.clone(),
            tracking_score: t.passthrough.detection_score,
        })
        .collect();
    Ok((outputs, next))
}
