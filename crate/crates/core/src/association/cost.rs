use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::filter::update::LocalHypotheses;
use crate::filter::FilterParams;
use crate::models::Models;
use crate::state::{Detection, PmbPosterior};

use super::MeasurementOutcome;

/// Negative log-likelihood association problem for one frame.
///
/// `f64::INFINITY` marks a forbidden pairing. New-track slots are implicit:
/// measurement `i` may only open new-track slot `i`, so cross entries are
/// never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    /// `detection[i][j]`: measurement `i` updates track `j`.
    pub detection: Vec<Vec<f64>>,
    /// Track `j` is not detected.
    pub misdetection: Vec<f64>,
    /// Measurement `i` is the first detection of a new track.
    pub new_track: Vec<f64>,
    /// Optional explicit clutter outcome per measurement.
    pub clutter: Option<Vec<f64>>,
}

impl CostMatrix {
    pub fn new(
        detection: Vec<Vec<f64>>,
        misdetection: Vec<f64>,
        new_track: Vec<f64>,
        clutter: Option<Vec<f64>>,
    ) -> Result<Self> {
        let c = CostMatrix {
            detection,
            misdetection,
            new_track,
            clutter,
        };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        let p = self.new_track.len();
        let n = self.misdetection.len();
        if self.detection.len() != p || self.detection.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter(format!(
                "detection block must be {p}x{n}"
            )));
        }
        if self.clutter.as_ref().is_some_and(|c| c.len() != p) {
            return Err(Error::InvalidParameter(format!(
                "clutter column must have {p} entries"
            )));
        }
        let entries = self
            .detection
            .iter()
            .flatten()
            .chain(&self.misdetection)
            .chain(&self.new_track)
            .chain(self.clutter.iter().flatten());
        for &v in entries {
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(Error::InvalidParameter(format!("invalid cost entry {v}")));
            }
        }
        Ok(())
    }

    pub fn n_tracks(&self) -> usize {
        self.misdetection.len()
    }

    pub fn n_measurements(&self) -> usize {
        self.new_track.len()
    }

    pub fn outcome_cost(&self, measurement: usize, outcome: MeasurementOutcome) -> f64 {
        match outcome {
            MeasurementOutcome::Track(j) => self.detection[measurement][j],
            MeasurementOutcome::NewTrack => self.new_track[measurement],
            MeasurementOutcome::Clutter => self
                .clutter
                .as_ref()
                .map_or(f64::INFINITY, |c| c[measurement]),
        }
    }

    /// Total cost of a global hypothesis given by its per-measurement
    /// outcomes: measurement terms in order, then misdetection terms of the
    /// tracks left unassigned, in track order.
    pub fn hypothesis_cost(&self, outcomes: &[MeasurementOutcome]) -> f64 {
        let mut detected = vec![false; self.n_tracks()];
        let mut total = 0.0;
        for (i, &o) in outcomes.iter().enumerate() {
            if let MeasurementOutcome::Track(j) = o {
                if std::mem::replace(&mut detected[j], true) {
                    return f64::INFINITY;
                }
            }
            total += self.outcome_cost(i, o);
        }
        for (j, &d) in detected.iter().enumerate() {
            if !d {
                total += self.misdetection[j];
            }
        }
        total
    }

    /// CSV dump: one row for the misdetection outcome (`m_0`) and one per
    /// measurement; columns are existing tracks followed by new-track slots
    /// (and clutter slots, when present).
    pub fn to_csv(&self) -> String {
        let n = self.n_tracks();
        let p = self.n_measurements();
        let fmt = |v: f64| {
            if v.is_finite() {
                format!("{v}")
            } else {
                "inf".to_string()
            }
        };
        let mut out = String::from("row");
        for j in 0..n {
            let _ = write!(out, ",T{}", j + 1);
        }
        for i in 0..p {
            let _ = write!(out, ",T{}_new", i + 1);
        }
        if self.clutter.is_some() {
            for i in 0..p {
                let _ = write!(out, ",C{}", i + 1);
            }
        }
        out.push('\n');

        out.push_str("m0");
        for &v in &self.misdetection {
            let _ = write!(out, ",{}", fmt(v));
        }
        let extra = if self.clutter.is_some() { 2 * p } else { p };
        for _ in 0..extra {
            out.push_str(",inf");
        }
        out.push('\n');

        for i in 0..p {
            let _ = write!(out, "m{}", i + 1);
            for &v in &self.detection[i] {
                let _ = write!(out, ",{}", fmt(v));
            }
            for k in 0..p {
                let v = if k == i { self.new_track[i] } else { f64::INFINITY };
                let _ = write!(out, ",{}", fmt(v));
            }
            if let Some(c) = &self.clutter {
                for k in 0..p {
                    let v = if k == i { c[i] } else { f64::INFINITY };
                    let _ = write!(out, ",{}", fmt(v));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Cost matrix for associating `detections` with the Bernoullis of
/// `posterior` (already predicted to the detection time).
pub fn build_cost_matrix(
    posterior: &PmbPosterior,
    detections: &[Detection],
    models: &Models,
    params: &FilterParams,
) -> Result<CostMatrix> {
    Ok(LocalHypotheses::build(&posterior.ppp, &posterior.bernoullis, detections, models, params)?.costs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{MeasurementModel, MotionModel};
    use crate::state::fixtures::{bernoulli, detection};
    use crate::state::{GaussianDensity, GaussianMixture};
    use nalgebra::{Matrix4, Vector2, Vector4};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn models(r_var: f64) -> Models {
        Models {
            motion: MotionModel::new(0.5, 2.0).unwrap(),
            measurement: MeasurementModel::isotropic(r_var.sqrt()).unwrap(),
        }
    }

    #[test]
    fn lone_measurement_outside_ppp_costs_clutter() {
        let params = FilterParams::default();
        let post = PmbPosterior::default();
        let dets = vec![detection(50.0, 50.0, 0.9)];
        let c = build_cost_matrix(&post, &dets, &models(0.25), &params).unwrap();
        assert_eq!(c.n_tracks(), 0);
        assert!((c.new_track[0] - -(0.001f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn certain_track_at_predicted_mean() {
        let params = FilterParams::default();
        let mut b = bernoulli(1.0, Some(0));
        b.density = GaussianDensity::new(Vector4::zeros(), Matrix4::from_diagonal(&Vector4::new(0.5, 0.5, 1.0, 1.0)));
        let post = PmbPosterior {
            bernoullis: vec![b],
            next_track_id: 1,
            ..Default::default()
        };
        let dets = vec![detection(0.0, 0.0, 1.0)];
        let c = build_cost_matrix(&post, &dets, &models(0.5), &params).unwrap();
        let expected = -(1.0 / (2.0 * PI)).ln();
        assert!((c.detection[0][0] - expected).abs() < 1e-12);
    }

    #[test]
    fn empty_detection_set_keeps_misdetection_structure() {
        let params = FilterParams::default();
        let post = PmbPosterior {
            bernoullis: vec![bernoulli(0.5, Some(0)), bernoulli(0.8, Some(1))],
            next_track_id: 2,
            ..Default::default()
        };
        let c = build_cost_matrix(&post, &[], &models(0.25), &params).unwrap();
        assert_eq!(c.n_measurements(), 0);
        assert_eq!(c.misdetection.len(), 2);
        // last_score 0.9 in the fixture.
        assert!((c.misdetection[0] - -(0.5f64 + 0.5 * 0.1).ln()).abs() < 1e-12);
    }

    /// Direct evaluation of the local hypothesis likelihoods with scalar
    /// arithmetic on the 2x2 innovation covariance.
    fn gaussian_2d(z: [f64; 2], m: [f64; 2], s: [[f64; 2]; 2]) -> f64 {
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        let d = [z[0] - m[0], z[1] - m[1]];
        let q = (s[1][1] * d[0] * d[0] - (s[0][1] + s[1][0]) * d[0] * d[1] + s[0][0] * d[1] * d[1]) / det;
        (-0.5 * q).exp() / (2.0 * PI * det.sqrt())
    }

    #[test]
    fn random_instance_matches_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let params = FilterParams::default();
        let r_var = 0.3;
        let mm = models(r_var);
        for _ in 0..20 {
            let mut bernoullis = Vec::new();
            for id in 0..3 {
                let mut b = bernoulli(rng.random_range(0.1..1.0), Some(id));
                let a = Matrix4::from_fn(|_, _| rng.random_range(-0.7..0.7));
                b.density = GaussianDensity::new(
                    Vector4::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), 0.0, 0.0),
                    a * a.transpose() + Matrix4::identity() * 0.2,
                );
                b.last_score = rng.random_range(0.1..1.0);
                bernoullis.push(b);
            }
            let mut ppp = GaussianMixture::new();
            ppp.push(0.1, GaussianDensity::new(Vector4::new(1.0, 1.0, 0.0, 0.0), Matrix4::identity() * 4.0));
            ppp.push(0.05, GaussianDensity::new(Vector4::new(-2.0, 0.0, 0.0, 0.0), Matrix4::identity() * 2.0));
            let post = PmbPosterior {
                ppp: ppp.clone(),
                bernoullis: bernoullis.clone(),
                next_track_id: 3,
                ..Default::default()
            };
            let dets: Vec<_> = (0..4)
                .map(|_| detection(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0), rng.random_range(0.2..1.0)))
                .collect();
            let c = build_cost_matrix(&post, &dets, &mm, &params).unwrap();
            let lambda_c = params.model.clutter_rate / params.model.fov_area;
            for (i, det) in dets.iter().enumerate() {
                let z = det.center;
                let pd = det.score();
                for (j, b) in bernoullis.iter().enumerate() {
                    let p = &b.density.covariance;
                    let s = [[p[(0, 0)] + r_var, p[(0, 1)]], [p[(1, 0)], p[(1, 1)] + r_var]];
                    let m = [b.density.mean[0], b.density.mean[1]];
                    let dist = crate::models::mahalanobis_distance(
                        &Vector2::from(z),
                        &Vector2::from(m),
                        &nalgebra::Matrix2::new(s[0][0], s[0][1], s[1][0], s[1][1]),
                    )
                    .unwrap();
                    let w = b.existence * pd * gaussian_2d(z, m, s);
                    let got = c.detection[i][j];
                    if dist > params.model.gating_threshold || w < params.local_hypothesis_pruning_threshold {
                        assert_eq!(got, f64::INFINITY);
                    } else {
                        assert!((got - -w.ln()).abs() < 1e-10, "{got} vs {}", -w.ln());
                    }
                }
                let mut rho = lambda_c;
                for comp in &ppp.components {
                    let p = &comp.density.covariance;
                    let s = [[p[(0, 0)] + r_var, p[(0, 1)]], [p[(1, 0)], p[(1, 1)] + r_var]];
                    let m = [comp.density.mean[0], comp.density.mean[1]];
                    let dist = crate::models::mahalanobis_distance(
                        &Vector2::from(z),
                        &Vector2::from(m),
                        &nalgebra::Matrix2::new(s[0][0], s[0][1], s[1][0], s[1][1]),
                    )
                    .unwrap();
                    if dist <= params.model.gating_threshold {
                        rho += comp.weight * pd * gaussian_2d(z, m, s);
                    }
                }
                assert!((c.new_track[i] - -rho.ln()).abs() < 1e-10);
            }
            for (j, b) in bernoullis.iter().enumerate() {
                let w = 1.0 - b.existence + b.existence * (1.0 - b.last_score);
                assert!((c.misdetection[j] - -w.ln()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn csv_layout() {
        let c = CostMatrix::new(
            vec![vec![1.0], vec![f64::INFINITY]],
            vec![0.5],
            vec![2.0, 3.0],
            None,
        )
        .unwrap();
        let csv = c.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "row,T1,T1_new,T2_new");
        assert_eq!(lines[1], "m0,0.5,inf,inf");
        assert_eq!(lines[2], "m1,1,2,inf");
        assert_eq!(lines[3], "m2,inf,inf,3");
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(CostMatrix::new(vec![vec![f64::NAN]], vec![0.0], vec![0.0], None).is_err());
        assert!(CostMatrix::new(vec![vec![f64::NEG_INFINITY]], vec![0.0], vec![0.0], None).is_err());
        assert!(CostMatrix::new(vec![vec![0.0, 1.0]], vec![0.0], vec![0.0], None).is_err());
    }
}
