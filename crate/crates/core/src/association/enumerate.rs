use crate::error::{Error, Result};

use super::{rank_order, CostMatrix, GlobalHypothesis, MeasurementOutcome};

pub const DEFAULT_ENUMERATION_BOUND: usize = 8;

/// Every global hypothesis of finite cost, cheapest first.
pub fn enumerate_hypotheses(c: &CostMatrix) -> Result<Vec<GlobalHypothesis>> {
    enumerate_hypotheses_bounded(c, DEFAULT_ENUMERATION_BOUND)
}

pub fn enumerate_hypotheses_bounded(c: &CostMatrix, bound: usize) -> Result<Vec<GlobalHypothesis>> {
    let n = c.n_tracks();
    let p = c.n_measurements();
    if n > bound || p > bound {
        return Err(Error::SizeLimit {
            tracks: n,
            measurements: p,
            bound,
        });
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(p);
    let mut used = vec![false; n];
    recurse(c, &mut current, &mut used, &mut out);
    out.sort_by(rank_order);
    Ok(out)
}

fn recurse(
    c: &CostMatrix,
    current: &mut Vec<MeasurementOutcome>,
    used: &mut [bool],
    out: &mut Vec<GlobalHypothesis>,
) {
    let i = current.len();
    if i == c.n_measurements() {
        let h = GlobalHypothesis::from_outcomes(c, current.clone());
        if h.cost.is_finite() {
            out.push(h);
        }
        return;
    }
    for j in 0..used.len() {
        if !used[j] && c.detection[i][j].is_finite() {
            used[j] = true;
            current.push(MeasurementOutcome::Track(j));
            recurse(c, current, used, out);
            current.pop();
            used[j] = false;
        }
    }
    if c.new_track[i].is_finite() {
        current.push(MeasurementOutcome::NewTrack);
        recurse(c, current, used, out);
        current.pop();
    }
    if c.clutter.as_ref().is_some_and(|cl| cl[i].is_finite()) {
        current.push(MeasurementOutcome::Clutter);
        recurse(c, current, used, out);
        current.pop();
    }
}
