//! Linear-Gaussian single-object models and the Poisson birth/clutter
//! intensities.
//!
//! Motion is 2D constant velocity with white-noise acceleration:
//!
//! ```text
//! F = | 1 0 dt 0 |     Q = σa² · G·Gᵀ,   G = | dt²/2   0   |
//!     | 0 1 0 dt |                           |   0   dt²/2 |
//!     | 0 0 1  0 |                           |  dt     0   |
//!     | 0 0 0  1 |                           |   0    dt   |
//! ```
//!
//! and the measurement is the BEV position `z = H·x + r`, `r ~ N(0, R)`.

use std::f64::consts::PI;

use nalgebra::{Cholesky, Matrix2, Matrix2x4, Matrix4, Matrix4x2, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{Detection, GaussianDensity, GaussianMixture};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionModel {
    dt: f64,
    process_noise_scale: f64,
}

impl MotionModel {
    /// `process_noise_scale` is the per-axis acceleration standard deviation
    /// in m/s².
    pub fn new(dt: f64, process_noise_scale: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        if !(process_noise_scale >= 0.0 && process_noise_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "process noise scale must be >= 0, got {process_noise_scale}"
            )));
        }
        Ok(MotionModel {
            dt,
            process_noise_scale,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn process_noise_scale(&self) -> f64 {
        self.process_noise_scale
    }

    pub fn transition(&self) -> Matrix4<f64> {
        let dt = self.dt;
        Matrix4::new(
            1.0, 0.0, dt, 0.0, //
            0.0, 1.0, 0.0, dt, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        )
    }

    /// Noise input matrix `G`: state increment per unit acceleration.
    pub fn noise_gain(&self) -> Matrix4x2<f64> {
        let dt = self.dt;
        let h = 0.5 * dt * dt;
        Matrix4x2::new(
            h, 0.0, //
            0.0, h, //
            dt, 0.0, //
            0.0, dt,
        )
    }

    pub fn process_noise(&self) -> Matrix4<f64> {
        let g = self.noise_gain();
        g * g.transpose() * (self.process_noise_scale * self.process_noise_scale)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementModel {
    noise: Matrix2<f64>,
}

impl MeasurementModel {
    pub fn new(noise: Matrix2<f64>) -> Result<Self> {
        if !noise.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("measurement noise is not finite".into()));
        }
        let scale = noise.amax().max(1.0);
        if (noise[(0, 1)] - noise[(1, 0)]).abs() > 1e-9 * scale {
            return Err(Error::InvalidParameter(
                "measurement noise is not symmetric".into(),
            ));
        }
        let det = noise.determinant();
        if noise[(0, 0)] < 0.0 || noise[(1, 1)] < 0.0 || det < -1e-9 * scale * scale {
            return Err(Error::InvalidParameter(
                "measurement noise is not positive semi-definite".into(),
            ));
        }
        Ok(MeasurementModel { noise })
    }

    pub fn isotropic(std_dev: f64) -> Result<Self> {
        Self::new(Matrix2::identity() * (std_dev * std_dev))
    }

    pub fn noise(&self) -> &Matrix2<f64> {
        &self.noise
    }

    pub fn observation() -> Matrix2x4<f64> {
        Matrix2x4::new(
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0,
        )
    }
}

/// Motion and measurement model used for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Models {
    pub motion: MotionModel,
    pub measurement: MeasurementModel,
}

/// Model-level parameters of the filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    pub survival_probability: f64,
    /// Expected clutter count per frame, spread uniformly over the FoV.
    pub clutter_rate: f64,
    pub fov_area: f64,
    pub birth_weight: f64,
    /// `P0`: variance of every birth component on each state axis.
    pub birth_covariance: f64,
    /// Mahalanobis distance gate.
    pub gating_threshold: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            survival_probability: 0.7,
            clutter_rate: 0.001,
            fov_area: 1.0,
            birth_weight: 0.1,
            birth_covariance: 15.0,
            gating_threshold: 40f64.sqrt(),
        }
    }
}

/// Birth weights below this are accepted but reported as unusually low.
pub const LOW_BIRTH_WEIGHT: f64 = 1e-3;

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| {
            Err(Error::InvalidParameter(format!("{what} out of range: {v}")))
        };
        if !(0.0..=1.0).contains(&self.survival_probability) {
            return bad("survival_probability", self.survival_probability);
        }
        if !(self.clutter_rate >= 0.0 && self.clutter_rate.is_finite()) {
            return bad("clutter_rate", self.clutter_rate);
        }
        if !(self.fov_area > 0.0 && self.fov_area.is_finite()) {
            return bad("fov_area", self.fov_area);
        }
        if !(self.birth_weight > 0.0 && self.birth_weight.is_finite()) {
            return bad("birth_weight", self.birth_weight);
        }
        if !(self.birth_covariance > 0.0 && self.birth_covariance.is_finite()) {
            return bad("birth_covariance", self.birth_covariance);
        }
        if !(self.gating_threshold > 0.0) {
            return bad("gating_threshold", self.gating_threshold);
        }
        Ok(())
    }

    /// Non-fatal remarks about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.birth_weight < LOW_BIRTH_WEIGHT {
            out.push(format!(
                "birth_weight {} is low; new objects will be slow to initiate",
                self.birth_weight
            ));
        }
        out
    }
}

/// Rectangular field of view in the global frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldOfView {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl FieldOfView {
    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    /// Grid of points spaced `spacing` apart, centred in the rectangle.
    pub fn grid(&self, spacing: f64) -> Vec<[f64; 2]> {
        assert!(spacing > 0.0, "grid spacing must be positive");
        let axis = |lo: f64, hi: f64| {
            let n = ((hi - lo) / spacing).floor().max(0.0) as usize + 1;
            let offset = lo + 0.5 * ((hi - lo) - (n - 1) as f64 * spacing);
            (0..n).map(move |k| offset + k as f64 * spacing)
        };
        let mut out = Vec::new();
        for y in axis(self.y_min, self.y_max) {
            for x in axis(self.x_min, self.x_max) {
                out.push([x, y]);
            }
        }
        out
    }
}

pub fn kalman_predict(d: &GaussianDensity, m: &MotionModel) -> Result<GaussianDensity> {
    d.validate()?;
    let f = m.transition();
    let mean = f * d.mean;
    let cov = f * d.covariance * f.transpose() + m.process_noise();
    Ok(GaussianDensity::new(mean, symmetrize(cov)))
}

/// Predicted measurement and its innovation covariance `S = H·P·Hᵀ + R`.
#[derive(Debug, Clone, Copy)]
pub struct Innovation {
    pub mean: Vector2<f64>,
    pub covariance: Matrix2<f64>,
    chol: Cholesky<f64, nalgebra::U2>,
}

impl Innovation {
    pub fn new(d: &GaussianDensity, mm: &MeasurementModel) -> Result<Self> {
        let h = MeasurementModel::observation();
        let mean = h * d.mean;
        let covariance = h * d.covariance * h.transpose() + mm.noise();
        let chol = Cholesky::new(covariance).ok_or_else(|| {
            Error::Singular(format!("innovation covariance {covariance:?} is not invertible"))
        })?;
        Ok(Innovation {
            mean,
            covariance,
            chol,
        })
    }

    pub fn squared_distance(&self, z: &Vector2<f64>) -> f64 {
        let nu = z - self.mean;
        let w = self.chol.solve(&nu);
        nu.dot(&w)
    }

    pub fn distance(&self, z: &Vector2<f64>) -> f64 {
        self.squared_distance(z).max(0.0).sqrt()
    }

    /// `log N(z; ẑ, S)`.
    pub fn log_likelihood(&self, z: &Vector2<f64>) -> f64 {
        let l = self.chol.l();
        let log_det = 2.0 * (l[(0, 0)].ln() + l[(1, 1)].ln());
        -(2.0 * PI).ln() - 0.5 * log_det - 0.5 * self.squared_distance(z)
    }
}

/// Kalman update with a position measurement. Returns the posterior and
/// `log N(z; H·m, H·P·Hᵀ + R)`.
pub fn kalman_update(
    d: &GaussianDensity,
    z: &Vector2<f64>,
    mm: &MeasurementModel,
) -> Result<(GaussianDensity, f64)> {
    d.validate()?;
    let innov = Innovation::new(d, mm)?;
    Ok(update_with(d, &innov, z, mm))
}

pub(crate) fn update_with(
    d: &GaussianDensity,
    innov: &Innovation,
    z: &Vector2<f64>,
    mm: &MeasurementModel,
) -> (GaussianDensity, f64) {
    let h = MeasurementModel::observation();
    let pht = d.covariance * h.transpose();
    // K = P·Hᵀ·S⁻¹, solved column-wise through the Cholesky factor of S.
    let gain = innov.chol.solve(&pht.transpose()).transpose();
    let mean = d.mean + gain * (z - innov.mean);
    // Joseph form keeps the result symmetric PSD.
    let ikh = Matrix4::identity() - gain * h;
    let cov = ikh * d.covariance * ikh.transpose() + gain * mm.noise() * gain.transpose();
    (
        GaussianDensity::new(mean, symmetrize(cov)),
        innov.log_likelihood(z),
    )
}

pub fn mahalanobis_distance(z1: &Vector2<f64>, z2: &Vector2<f64>, p: &Matrix2<f64>) -> Result<f64> {
    let inv = p
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Singular(format!("covariance {p:?} is not invertible")))?;
    let d = z1 - z2;
    Ok(d.dot(&(inv * d)).max(0.0).sqrt())
}

/// Indices of detections inside the ellipsoidal gate of `track`.
pub fn gate(
    track: &GaussianDensity,
    detections: &[Detection],
    mm: &MeasurementModel,
    params: &ModelParams,
) -> Result<Vec<usize>> {
    let innov = Innovation::new(track, mm)?;
    Ok(gate_with(&innov, detections, params.gating_threshold))
}

pub(crate) fn gate_with(innov: &Innovation, detections: &[Detection], threshold: f64) -> Vec<usize> {
    detections
        .iter()
        .enumerate()
        .filter(|(_, det)| innov.distance(&det.position()) <= threshold)
        .map(|(i, _)| i)
        .collect()
}

/// Birth intensity with one equally weighted component per location; each
/// component has zero mean velocity and covariance `P0·I`.
pub fn make_birth_intensity(locations: &[[f64; 2]], params: &ModelParams) -> GaussianMixture {
    let cov = Matrix4::identity() * params.birth_covariance;
    let mut mixture = GaussianMixture::new();
    for loc in locations {
        mixture.push(
            params.birth_weight,
            GaussianDensity::new(Vector4::new(loc[0], loc[1], 0.0, 0.0), cov),
        );
    }
    mixture
}

/// Uniform clutter intensity `λc = clutter_rate / fov_area`.
pub fn clutter_intensity(params: &ModelParams) -> Result<f64> {
    if !(params.fov_area > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "fov_area must be > 0, got {}",
            params.fov_area
        )));
    }
    Ok(params.clutter_rate / params.fov_area)
}

fn symmetrize(m: Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::fixtures::detection;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_density(rng: &mut impl Rng) -> GaussianDensity {
        let a = Matrix4::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let cov = a * a.transpose() + Matrix4::identity() * 0.1;
        let mean = Vector4::from_fn(|_, _| rng.random_range(-10.0..10.0));
        GaussianDensity::new(mean, cov)
    }

    #[test]
    fn predict_moves_mean_at_constant_velocity() {
        let d = GaussianDensity::new(Vector4::new(0.0, 0.0, 1.0, 0.0), Matrix4::identity());
        let m = MotionModel::new(0.5, 2.0).unwrap();
        let p = kalman_predict(&d, &m).unwrap();
        assert_eq!(p.mean, Vector4::new(0.5, 0.0, 1.0, 0.0));
        assert!(p.validate().is_ok());
    }

    #[test]
    fn predict_without_noise_or_velocity_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut d = random_density(&mut rng);
        d.mean[2] = 0.0;
        d.mean[3] = 0.0;
        // Zero velocity variance keeps the covariance unchanged too.
        let cov = Matrix4::from_diagonal(&Vector4::new(2.0, 3.0, 0.0, 0.0));
        d.covariance = cov;
        let m = MotionModel::new(0.5, 0.0).unwrap();
        let p = kalman_predict(&d, &m).unwrap();
        assert_eq!(p.mean, d.mean);
        assert_eq!(p.covariance, d.covariance);
    }

    #[test]
    fn predict_rejects_non_psd() {
        let mut d = GaussianDensity::new(Vector4::zeros(), Matrix4::identity());
        d.covariance[(1, 1)] = -2.0;
        let m = MotionModel::new(0.5, 1.0).unwrap();
        assert!(matches!(kalman_predict(&d, &m), Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn motion_model_rejects_bad_dt() {
        assert!(MotionModel::new(0.0, 1.0).is_err());
        assert!(MotionModel::new(-0.5, 1.0).is_err());
        assert!(MotionModel::new(0.5, -1.0).is_err());
    }

    #[test]
    fn zero_innovation_update() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut d = random_density(&mut rng);
        d.mean[0] = 3.0;
        d.mean[1] = 4.0;
        let mm = MeasurementModel::isotropic(0.7).unwrap();
        let (post, ll) = kalman_update(&d, &Vector2::new(3.0, 4.0), &mm).unwrap();
        assert!((post.mean[0] - 3.0).abs() < 1e-12);
        assert!((post.mean[1] - 4.0).abs() < 1e-12);
        let s = d.covariance.fixed_view::<2, 2>(0, 0) + mm.noise();
        let expected = -(2.0 * PI).ln() - 0.5 * s.determinant().ln();
        assert!((ll - expected).abs() < 1e-12, "{ll} vs {expected}");
    }

    #[test]
    fn uninformative_measurement_leaves_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_density(&mut rng);
        for &r in &[1e4, 1e6, 1e8] {
            let mm = MeasurementModel::isotropic(f64::sqrt(r)).unwrap();
            let (post, _) = kalman_update(&d, &Vector2::new(5.0, -5.0), &mm).unwrap();
            let tol = 100.0 * (1.0 + d.covariance.amax() * 20.0) / r;
            assert!((post.mean - d.mean).amax() < tol, "R={r}");
            assert!((post.covariance - d.covariance).amax() < tol, "R={r}");
        }
    }

    /// Textbook Kalman step written out with explicit 2x2 inversion.
    fn textbook_update(d: &GaussianDensity, z: [f64; 2], r: [[f64; 2]; 2]) -> (Vector4<f64>, Matrix4<f64>) {
        let p = &d.covariance;
        let s = [
            [p[(0, 0)] + r[0][0], p[(0, 1)] + r[0][1]],
            [p[(1, 0)] + r[1][0], p[(1, 1)] + r[1][1]],
        ];
        let det = s[0][0] * s[1][1] - s[0][1] * s[1][0];
        let si = [[s[1][1] / det, -s[0][1] / det], [-s[1][0] / det, s[0][0] / det]];
        let mut k = [[0.0; 2]; 4];
        for (i, row) in k.iter_mut().enumerate() {
            for (j, kij) in row.iter_mut().enumerate() {
                *kij = p[(i, 0)] * si[0][j] + p[(i, 1)] * si[1][j];
            }
        }
        let nu = [z[0] - d.mean[0], z[1] - d.mean[1]];
        let mut mean = d.mean;
        for i in 0..4 {
            mean[i] += k[i][0] * nu[0] + k[i][1] * nu[1];
        }
        let mut cov = *p;
        for i in 0..4 {
            for j in 0..4 {
                cov[(i, j)] -= k[i][0] * p[(0, j)] + k[i][1] * p[(1, j)];
            }
        }
        (mean, cov)
    }

    #[test]
    fn update_matches_textbook_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let d = random_density(&mut rng);
            let r = [[0.3, 0.05], [0.05, 0.2]];
            let mm = MeasurementModel::new(Matrix2::new(0.3, 0.05, 0.05, 0.2)).unwrap();
            let z = [d.mean[0] + 1.0, d.mean[1]];
            let (post, _) = kalman_update(&d, &Vector2::new(z[0], z[1]), &mm).unwrap();
            let (mean, cov) = textbook_update(&d, z, r);
            assert!((post.mean - mean).amax() < 1e-10);
            assert!((post.covariance - cov).amax() < 1e-10);
        }
    }

    #[test]
    fn posterior_no_larger_than_prior() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let d = random_density(&mut rng);
            let mm = MeasurementModel::isotropic(0.5).unwrap();
            let (post, _) = kalman_update(&d, &Vector2::new(1.0, 2.0), &mm).unwrap();
            let diff = d.covariance - post.covariance;
            let min_eig = diff.symmetric_eigen().eigenvalues.min();
            assert!(min_eig > -1e-9, "{min_eig}");
            assert!(post.validate().is_ok());
        }
    }

    #[test]
    fn singular_innovation_is_an_error() {
        let d = GaussianDensity::new(Vector4::zeros(), Matrix4::zeros());
        let mm = MeasurementModel::new(Matrix2::zeros()).unwrap();
        assert!(matches!(
            kalman_update(&d, &Vector2::zeros(), &mm),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn mahalanobis_examples() {
        let id = Matrix2::identity();
        let d = mahalanobis_distance(&Vector2::new(3.0, 4.0), &Vector2::zeros(), &id).unwrap();
        assert!((d - 5.0).abs() < 1e-15);
        let p = Vector2::new(1.5, -2.0);
        assert_eq!(mahalanobis_distance(&p, &p, &id).unwrap(), 0.0);
        let d = mahalanobis_distance(
            &Vector2::new(2.0, 0.0),
            &Vector2::zeros(),
            &Matrix2::new(4.0, 0.0, 0.0, 1.0),
        )
        .unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        assert!(matches!(
            mahalanobis_distance(&p, &p, &Matrix2::zeros()),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn mahalanobis_symmetric_and_whitening_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let a = Matrix2::from_fn(|_, _| rng.random_range(-2.0..2.0));
            let p = a * a.transpose() + Matrix2::identity() * 0.05;
            let z1 = Vector2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let z2 = Vector2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let d12 = mahalanobis_distance(&z1, &z2, &p).unwrap();
            let d21 = mahalanobis_distance(&z2, &z1, &p).unwrap();
            assert!((d12 - d21).abs() < 1e-12);
            // Any invertible affine map applied to points and covariance.
            let t = Matrix2::from_fn(|_, _| rng.random_range(-2.0..2.0)) + Matrix2::identity() * 3.0;
            let b = Vector2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            let dt = mahalanobis_distance(&(t * z1 + b), &(t * z2 + b), &(t * p * t.transpose())).unwrap();
            assert!((d12 - dt).abs() < 1e-8 * (1.0 + d12), "{d12} vs {dt}");
        }
    }

    fn unit_innovation_track() -> (GaussianDensity, MeasurementModel) {
        let d = GaussianDensity::new(Vector4::zeros(), Matrix4::from_diagonal(&Vector4::new(0.5, 0.5, 1.0, 1.0)));
        (d, MeasurementModel::isotropic(0.5f64.sqrt()).unwrap())
    }

    #[test]
    fn gate_boundary() {
        let (d, mm) = unit_innovation_track();
        let params = ModelParams::default();
        let r = 40f64.sqrt();
        let dets = vec![
            detection(0.0, 0.0, 0.9),
            detection(r + 1e-9, 0.0, 0.9),
            detection(0.0, r - 1e-9, 0.9),
        ];
        assert_eq!(gate(&d, &dets, &mm, &params).unwrap(), vec![0, 2]);
    }

    #[test]
    fn gate_matches_direct_distance_filter() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let params = ModelParams::default();
        for _ in 0..20 {
            let d = random_density(&mut rng);
            let mm = MeasurementModel::isotropic(0.5).unwrap();
            let dets: Vec<_> = (0..10)
                .map(|_| detection(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), 0.5))
                .collect();
            let s = d.covariance.fixed_view::<2, 2>(0, 0) + mm.noise();
            let expected: Vec<usize> = (0..10)
                .filter(|&i| {
                    mahalanobis_distance(&dets[i].position(), &d.position(), &s.into()).unwrap()
                        <= params.gating_threshold
                })
                .collect();
            assert_eq!(gate(&d, &dets, &mm, &params).unwrap(), expected);
        }
    }

    #[test]
    fn gate_threshold_limits() {
        let (d, mm) = unit_innovation_track();
        let dets = vec![detection(0.0, 0.0, 0.9), detection(100.0, -3.0, 0.9), detection(1e-3, 0.0, 0.9)];
        let mut params = ModelParams { gating_threshold: f64::INFINITY, ..Default::default() };
        assert_eq!(gate(&d, &dets, &mm, &params).unwrap(), vec![0, 1, 2]);
        params.gating_threshold = 0.0;
        assert_eq!(gate(&d, &dets, &mm, &params).unwrap(), vec![0]);
    }

    #[test]
    fn birth_intensity_components() {
        let params = ModelParams {
            birth_weight: 0.1,
            birth_covariance: 15.0,
            ..Default::default()
        };
        let b = make_birth_intensity(&[[1.0, 2.0], [3.0, 4.0]], &params);
        assert_eq!(b.len(), 2);
        for c in &b.components {
            assert_eq!(c.weight, 0.1);
            assert_eq!(c.density.covariance, Matrix4::identity() * 15.0);
            assert_eq!(c.density.mean[2], 0.0);
        }
        assert!(make_birth_intensity(&[], &params).is_empty());
    }

    #[test]
    fn low_birth_weight_flagged_but_accepted() {
        let params = ModelParams {
            birth_weight: 1e-4,
            ..Default::default()
        };
        assert!(params.validate().is_ok());
        assert_eq!(params.warnings().len(), 1);
        assert!(ModelParams::default().warnings().is_empty());
    }

    #[test]
    fn clutter_intensity_examples() {
        let mut p = ModelParams { clutter_rate: 0.001, fov_area: 1.0, ..Default::default() };
        assert_eq!(clutter_intensity(&p).unwrap(), 0.001);
        p.clutter_rate = 0.0;
        assert_eq!(clutter_intensity(&p).unwrap(), 0.0);
        p.clutter_rate = 2.0;
        p.fov_area = 100.0;
        assert!((clutter_intensity(&p).unwrap() - 0.02).abs() < 1e-15);
        p.fov_area = 0.0;
        assert!(clutter_intensity(&p).is_err());
    }

    #[test]
    fn fov_grid_covers_rectangle() {
        let fov = FieldOfView { x_min: 0.0, x_max: 100.0, y_min: 0.0, y_max: 50.0 };
        let g = fov.grid(10.0);
        assert_eq!(g.len(), 11 * 6);
        assert!(g.iter().all(|p| fov.contains(p[0], p[1])));
    }
}
