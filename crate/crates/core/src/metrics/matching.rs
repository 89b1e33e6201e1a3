use std::collections::HashMap;

use super::{EvalFrame, EvalScene, FrameCounts, GtBox, MatchConfig, PredBox};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FrameMatch {
    /// (gt index, prediction index, distance), in matching order.
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_gt: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
}

fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Greedy one-to-one matching in ascending distance order; ties go to the
/// lower ground-truth index, then the lower prediction index.
pub fn match_frame(gt: &[GtBox], pred: &[PredBox], cfg: &MatchConfig) -> FrameMatch {
    let mut candidates = Vec::new();
    for (g, gb) in gt.iter().enumerate() {
        for (p, pb) in pred.iter().enumerate() {
            let d = distance(gb.center, pb.center);
            if d <= cfg.match_distance {
                candidates.push((d, g, p));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut gt_used = vec![false; gt.len()];
    let mut pred_used = vec![false; pred.len()];
    let mut pairs = Vec::new();
    for (d, g, p) in candidates {
        if !gt_used[g] && !pred_used[p] {
            gt_used[g] = true;
            pred_used[p] = true;
            pairs.push((g, p, d));
        }
    }
    FrameMatch {
        pairs,
        unmatched_gt: (0..gt.len()).filter(|&g| !gt_used[g]).collect(),
        unmatched_pred: (0..pred.len()).filter(|&p| !pred_used[p]).collect(),
    }
}

#[derive(Default)]
struct GtHistory {
    frames: usize,
    tracked: usize,
    last_id: Option<String>,
    segments: usize,
    tracked_last_frame: bool,
}

/// Counts over one scene's matched frames. IDS is counted when a ground
/// truth is matched to a different track than at its previous match; FRAG
/// counts every resumption of tracking after an interruption.
pub fn accumulate(frames: &[EvalFrame], matches: &[FrameMatch]) -> FrameCounts {
    let mut c = FrameCounts::default();
    let mut history: HashMap<&str, GtHistory> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    for (frame, m) in frames.iter().zip(matches) {
        c.gt += frame.gt.len();
        c.tp += m.pairs.len();
        c.fp += m.unmatched_pred.len();
        c.fn_ += m.unmatched_gt.len();
        let mut matched: HashMap<usize, usize> = HashMap::new();
        for &(g, p, d) in &m.pairs {
            c.distance_sum += d;
            matched.insert(g, p);
        }
        for (g, gb) in frame.gt.iter().enumerate() {
            let h = history.entry(gb.id.as_str()).or_insert_with(|| {
                order.push(gb.id.as_str());
                GtHistory::default()
            });
            h.frames += 1;
            match matched.get(&g) {
                Some(&p) => {
                    let id = &frame.pred[p].id;
                    if h.last_id.as_ref().is_some_and(|last| last != id) {
                        c.ids += 1;
                    }
                    h.last_id = Some(id.clone());
                    h.tracked += 1;
                    if !h.tracked_last_frame {
                        h.segments += 1;
                    }
                    h.tracked_last_frame = true;
                }
                None => h.tracked_last_frame = false,
            }
        }
        // A ground truth absent from a frame is not being tracked there.
        let present: std::collections::HashSet<&str> = frame.gt.iter().map(|g| g.id.as_str()).collect();
        for (id, h) in history.iter_mut() {
            if !present.contains(id) {
                h.tracked_last_frame = false;
            }
        }
    }
    for id in order {
        let h = &history[id];
        c.trajectories += 1;
        c.frag += h.segments.saturating_sub(1);
        let ratio = h.tracked as f64 / h.frames as f64;
        if ratio >= 0.8 {
            c.mt += 1;
        }
        if ratio <= 0.2 {
            c.ml += 1;
        }
    }
    c
}

/// Counts over all scenes keeping only predictions scored at least
/// `threshold`.
pub fn evaluate_at(scenes: &[EvalScene], cfg: &MatchConfig, threshold: f64) -> FrameCounts {
    let mut total = FrameCounts::default();
    for scene in scenes {
        let filtered: Vec<EvalFrame> = scene
            .frames
            .iter()
            .map(|f| EvalFrame {
                gt: f.gt.clone(),
                pred: f.pred.iter().filter(|p| p.score >= threshold).cloned().collect(),
            })
            .collect();
        let matches: Vec<FrameMatch> = filtered.iter().map(|f| match_frame(&f.gt, &f.pred, cfg)).collect();
        total += accumulate(&filtered, &matches);
    }
    total
}
