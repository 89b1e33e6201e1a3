//! Data association: cost matrices, the single-best assignment, Murty's
//! k-best ranking and an exhaustive enumerator.
//!
//! A global hypothesis gives every measurement one outcome (an existing
//! track, a new track, or clutter when the cost matrix has a clutter column)
//! and every existing track at most one measurement; tracks without one are
//! misdetected.
//!
//! The solvers reduce a [`CostMatrix`] to a rectangular assignment with one
//! row per measurement and columns `[tracks | new-track slots | clutter
//! slots]`. Track columns carry `detection - misdetection`, so the assignment
//! cost plus the sum of all misdetection costs equals the hypothesis cost.

mod cost;
mod enumerate;
mod lsap;
mod murty;

pub use cost::{build_cost_matrix, CostMatrix};
pub use enumerate::{enumerate_hypotheses, enumerate_hypotheses_bounded, DEFAULT_ENUMERATION_BOUND};
pub use lsap::linear_sum_assignment;
pub use murty::murty_kbest;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasurementOutcome {
    Track(usize),
    NewTrack,
    Clutter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrackOutcome {
    Detected(usize),
    Misdetected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalHypothesis {
    pub measurements: Vec<MeasurementOutcome>,
    pub tracks: Vec<TrackOutcome>,
    pub cost: f64,
}

impl GlobalHypothesis {
    pub fn from_outcomes(c: &CostMatrix, measurements: Vec<MeasurementOutcome>) -> Self {
        let mut tracks = vec![TrackOutcome::Misdetected; c.n_tracks()];
        for (i, o) in measurements.iter().enumerate() {
            if let MeasurementOutcome::Track(j) = *o {
                tracks[j] = TrackOutcome::Detected(i);
            }
        }
        let cost = c.hypothesis_cost(&measurements);
        GlobalHypothesis {
            measurements,
            tracks,
            cost,
        }
    }

    /// Tie-break key: per measurement, the track index, then `n` for a new
    /// track and `n + 1` for clutter; compared lexicographically.
    pub fn key(&self) -> Vec<usize> {
        let n = self.tracks.len();
        self.measurements
            .iter()
            .map(|o| match *o {
                MeasurementOutcome::Track(j) => j,
                MeasurementOutcome::NewTrack => n,
                MeasurementOutcome::Clutter => n + 1,
            })
            .collect()
    }

    /// Binary association matrix. Rows are `m_0` (no measurement) followed by
    /// the measurements; columns are the existing tracks followed by one
    /// new-track slot per measurement. Every column sums to one.
    pub fn association_matrix(&self) -> Vec<Vec<u8>> {
        let n = self.tracks.len();
        let p = self.measurements.len();
        let mut a = vec![vec![0u8; n + p]; p + 1];
        for (j, t) in self.tracks.iter().enumerate() {
            match *t {
                TrackOutcome::Detected(i) => a[i + 1][j] = 1,
                TrackOutcome::Misdetected => a[0][j] = 1,
            }
        }
        for (i, o) in self.measurements.iter().enumerate() {
            if *o == MeasurementOutcome::NewTrack {
                a[i + 1][n + i] = 1;
            } else {
                a[0][n + i] = 1;
            }
        }
        a
    }
}

/// Orders hypotheses by cost, then by [`GlobalHypothesis::key`].
pub(crate) fn rank_order(a: &GlobalHypothesis, b: &GlobalHypothesis) -> Ordering {
    a.cost.total_cmp(&b.cost).then_with(|| a.key().cmp(&b.key()))
}

/// The minimum-cost global hypothesis.
pub fn hungarian_solve(c: &CostMatrix) -> Result<GlobalHypothesis> {
    solve_constrained(c, &Reduction::new(c), &[], &[]).ok_or(Error::Infeasible)
}

/// The rectangular assignment behind a cost matrix.
pub(crate) struct Reduction {
    rows: Vec<Vec<f64>>,
    cols: usize,
}

impl Reduction {
    pub(crate) fn new(c: &CostMatrix) -> Self {
        let n = c.n_tracks();
        let p = c.n_measurements();
        let slots = if c.clutter.is_some() { 2 } else { 1 };
        let cols = n + slots * p;
        // Tracks that can never be misdetected get a large finite stand-in,
        // which makes leaving them unassigned strictly worse than any
        // assignment that covers them.
        let max_abs = c
            .detection
            .iter()
            .flatten()
            .chain(&c.misdetection)
            .chain(&c.new_track)
            .chain(c.clutter.iter().flatten())
            .filter(|v| v.is_finite())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let big = (max_abs + 1.0) * 4.0 * (cols as f64 + 1.0);
        let miss: Vec<f64> = c
            .misdetection
            .iter()
            .map(|&m| if m.is_finite() { m } else { big })
            .collect();
        let rows = (0..p)
            .map(|i| {
                let mut row = vec![f64::INFINITY; cols];
                for j in 0..n {
                    row[j] = c.detection[i][j] - miss[j];
                }
                row[n + i] = c.new_track[i];
                if let Some(cl) = &c.clutter {
                    row[n + p + i] = cl[i];
                }
                row
            })
            .collect();
        Reduction { rows, cols }
    }

    fn outcome(&self, n: usize, p: usize, col: usize) -> MeasurementOutcome {
        if col < n {
            MeasurementOutcome::Track(col)
        } else if col < n + p {
            MeasurementOutcome::NewTrack
        } else {
            MeasurementOutcome::Clutter
        }
    }

    pub(crate) fn column(&self, n: usize, p: usize, row: usize, o: MeasurementOutcome) -> usize {
        match o {
            MeasurementOutcome::Track(j) => j,
            MeasurementOutcome::NewTrack => n + row,
            MeasurementOutcome::Clutter => n + p + row,
        }
    }
}

/// Best hypothesis with the given (row, column) pairs forced or forbidden.
/// `None` when no hypothesis of finite cost satisfies the constraints.
pub(crate) fn solve_constrained(
    c: &CostMatrix,
    red: &Reduction,
    forced: &[(usize, usize)],
    forbidden: &[(usize, usize)],
) -> Option<GlobalHypothesis> {
    let n = c.n_tracks();
    let p = c.n_measurements();
    let mut m = red.rows.clone();
    for &(r, col) in forced {
        for (k, row) in m.iter_mut().enumerate() {
            if k == r {
                for (j, v) in row.iter_mut().enumerate() {
                    if j != col {
                        *v = f64::INFINITY;
                    }
                }
            } else {
                row[col] = f64::INFINITY;
            }
        }
    }
    for &(r, col) in forbidden {
        m[r][col] = f64::INFINITY;
    }
    let assignment = linear_sum_assignment(&m, red.cols)?;
    let outcomes = assignment
        .iter()
        .map(|&col| red.outcome(n, p, col))
        .collect();
    let h = GlobalHypothesis::from_outcomes(c, outcomes);
    h.cost.is_finite().then_some(h)
}
