use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::matching::{accumulate, match_frame};
use super::{evaluate_at, mota, motar, motp, EvalScene, FrameCounts, MatchConfig};

/// Lowest recall a sweep may start from (exclusive).
pub const MIN_RECALL: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub recall_target: f64,
    /// Recall actually reached at `threshold`.
    pub recall: f64,
    pub threshold: f64,
    pub counts: FrameCounts,
    pub mota: f64,
    pub motar: f64,
    pub motp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallSweep {
    pub points: Vec<SweepPoint>,
    pub gt: usize,
    pub match_distance: f64,
    /// Why the sweep is empty, when it is.
    pub diagnostic: Option<String>,
}

/// `n` evenly spaced recalls from `lo` to `hi` inclusive.
pub fn recall_targets(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// Recall sweep over tracking-score thresholds.
///
/// The recall range runs from the first achievable recall above 0.1 to the
/// highest achievable recall. Of its `n_recalls` evenly spaced targets the
/// upper `n_recalls - 1` are evaluated; each target maps to the largest
/// score threshold that still reaches it, and counts are recomputed there.
pub fn recall_sweep(scenes: &[EvalScene], cfg: &MatchConfig) -> Result<RecallSweep> {
    cfg.validate()?;
    let mut scores = Vec::new();
    let mut gt = 0;
    for scene in scenes {
        let matches: Vec<_> = scene
            .frames
            .iter()
            .map(|f| match_frame(&f.gt, &f.pred, cfg))
            .collect();
        gt += accumulate(&scene.frames, &matches).gt;
        for (f, m) in scene.frames.iter().zip(&matches) {
            scores.extend(m.pairs.iter().map(|&(_, p, _)| f.pred[p].score));
        }
    }
    let empty = |why: String| RecallSweep {
        points: Vec::new(),
        gt,
        match_distance: cfg.match_distance,
        diagnostic: Some(why),
    };
    if gt == 0 {
        return Ok(empty("no ground truth".into()));
    }
    scores.sort_by(|a, b| b.total_cmp(a));
    let g = gt as f64;
    let k_lo = (MIN_RECALL * g).floor() as usize + 1;
    if scores.len() < k_lo {
        return Ok(empty(format!(
            "highest achievable recall {:.4} does not exceed {MIN_RECALL}",
            scores.len() as f64 / g
        )));
    }
    let lo = k_lo as f64 / g;
    let hi = scores.len() as f64 / g;
    let targets = if lo == hi {
        vec![lo]
    } else {
        recall_targets(lo, hi, cfg.n_recalls)[1..].to_vec()
    };
    let points = targets
        .into_iter()
        .map(|r| {
            let k = ((r * g - 1e-9).ceil() as usize).clamp(1, scores.len());
            let threshold = scores[k - 1];
            let counts = evaluate_at(scenes, cfg, threshold);
            let recall = counts.tp as f64 / g;
            SweepPoint {
                recall_target: r,
                recall,
                threshold,
                counts,
                mota: mota(&counts),
                motar: if counts.tp == 0 { 0.0 } else { motar(&counts, recall, gt) },
                motp: motp(counts.distance_sum, counts.tp),
            }
        })
        .collect();
    Ok(RecallSweep {
        points,
        gt,
        match_distance: cfg.match_distance,
        diagnostic: None,
    })
}

/// Mean MOTAR over the sweep; NaN for an empty sweep.
pub fn amota(sweep: &RecallSweep) -> f64 {
    if sweep.points.is_empty() {
        return f64::NAN;
    }
    sweep.points.iter().map(|p| p.motar).sum::<f64>() / sweep.points.len() as f64
}

/// Mean MOTP over the sweep, counting points without true positives at the
/// match distance; NaN for an empty sweep.
pub fn amotp(sweep: &RecallSweep) -> f64 {
    if sweep.points.is_empty() {
        return f64::NAN;
    }
    sweep
        .points
        .iter()
        .map(|p| if p.motp.is_nan() { sweep.match_distance } else { p.motp })
        .sum::<f64>()
        / sweep.points.len() as f64
}
