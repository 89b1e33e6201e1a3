//! Detection conditioning: score thresholding and greedy non-maximum
//! suppression with upright 3D box IoU.

use serde::{Deserialize, Serialize};

use crate::state::Detection;

/// Upright 3D box. `center[2]` is the vertical centre; `size` is
/// (length, width, height) with length along `yaw`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3D {
    pub center: [f64; 3],
    pub size: [f64; 3],
    pub yaw: f64,
    pub score: f64,
}

impl Box3D {
    pub fn from_detection(d: &Detection) -> Self {
        Box3D {
            center: [d.center[0], d.center[1], d.passthrough.z],
            size: d.passthrough.size,
            yaw: d.passthrough.yaw,
            score: d.score(),
        }
    }

    pub fn volume(&self) -> f64 {
        self.size.iter().product()
    }

    fn is_degenerate(&self) -> bool {
        self.size.iter().any(|s| !(*s > 0.0 && s.is_finite()))
            || self.center.iter().any(|c| !c.is_finite())
            || !self.yaw.is_finite()
    }

    /// BEV footprint corners, counter-clockwise.
    pub fn corners(&self) -> [[f64; 2]; 4] {
        let (s, c) = self.yaw.sin_cos();
        let hl = 0.5 * self.size[0];
        let hw = 0.5 * self.size[1];
        let [x, y, _] = self.center;
        [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
            .map(|(dx, dy)| [x + c * dx - s * dy, y + s * dx + c * dy])
    }

    /// Whether a point lies inside the box.
    pub fn contains(&self, p: [f64; 3]) -> bool {
        let (s, c) = self.yaw.sin_cos();
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        u.abs() <= 0.5 * self.size[0]
            && v.abs() <= 0.5 * self.size[1]
            && (p[2] - self.center[2]).abs() <= 0.5 * self.size[2]
    }
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let twice: f64 = (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    0.5 * twice.abs()
}

/// Intersection of a polygon with a convex counter-clockwise polygon.
fn clip(subject: &[[f64; 2]], clipper: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut out = subject.to_vec();
    for i in 0..clipper.len() {
        if out.is_empty() {
            break;
        }
        let a = clipper[i];
        let b = clipper[(i + 1) % clipper.len()];
        let side = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    out.push(intersect(prev, cur, sp, sc));
                }
                out.push(cur);
            } else if sp >= 0.0 {
                out.push(intersect(prev, cur, sp, sc));
            }
        }
    }
    out
}

fn intersect(p: [f64; 2], q: [f64; 2], sp: f64, sq: f64) -> [f64; 2] {
    let t = sp / (sp - sq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
}

/// Bird's-eye-view intersection area of two boxes.
pub fn bev_intersection(a: &Box3D, b: &Box3D) -> f64 {
    polygon_area(&clip(&a.corners(), &b.corners()))
}

/// Intersection over union of two upright boxes; 0 if either is degenerate.
pub fn iou_3d(a: &Box3D, b: &Box3D) -> f64 {
    if a.is_degenerate() || b.is_degenerate() {
        return 0.0;
    }
    let za = (a.center[2] - 0.5 * a.size[2], a.center[2] + 0.5 * a.size[2]);
    let zb = (b.center[2] - 0.5 * b.size[2], b.center[2] + 0.5 * b.size[2]);
    let dz = (za.1.min(zb.1) - za.0.max(zb.0)).max(0.0);
    if dz == 0.0 {
        return 0.0;
    }
    let inter = bev_intersection(a, b) * dz;
    let union = a.volume() + b.volume() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Detections with score strictly above `threshold`, in input order. A
/// threshold of zero or less keeps everything.
pub fn score_filter(detections: &[Detection], threshold: f64) -> Vec<Detection> {
    if threshold <= 0.0 {
        return detections.to_vec();
    }
    detections
        .iter()
        .filter(|d| d.score() > threshold)
        .cloned()
        .collect()
}

/// Greedy suppression in descending score order: a detection is dropped
/// when its IoU with an already kept one exceeds `threshold`. The output is
/// sorted by descending score; equal scores keep their input order.
pub fn nms(detections: &[Detection], threshold: f64) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&i, &j| detections[j].score().total_cmp(&detections[i].score()));
    let mut kept: Vec<(usize, Box3D)> = Vec::with_capacity(detections.len());
    for i in order {
        let b = Box3D::from_detection(&detections[i]);
        if kept.iter().all(|(_, k)| iou_3d(k, &b) <= threshold) {
            kept.push((i, b));
        }
    }
    kept.into_iter().map(|(i, _)| detections[i].clone()).collect()
}

/// Score filter followed by NMS.
pub fn preprocess(detections: &[Detection], score_threshold: f64, nms_threshold: f64) -> Vec<Detection> {
    nms(&score_filter(detections, score_threshold), nms_threshold)
}
