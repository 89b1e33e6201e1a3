use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::schema::{ResultsFile, TrackRecord};
use super::SceneDetections;

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 40.0;

/// FNV-1a hash of a track ID mapped to an HSL colour.
pub fn track_color(id: &str) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let hue = h % 360;
    let sat = 55 + (h >> 16) % 30;
    let light = 35 + (h >> 32) % 20;
    format!("hsl({hue},{sat}%,{light}%)")
}

#[derive(Clone, Copy)]
struct View {
    x0: f64,
    y0: f64,
    scale: f64,
    height: f64,
}

impl View {
    fn new(points: impl Iterator<Item = [f64; 2]>) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for [x, y] in points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            (x0, x1, y0, y1) = (-50.0, 50.0, -50.0, 50.0);
        }
        let pad = 5.0;
        let (x0, x1, y0, y1) = (x0 - pad, x1 + pad, y0 - pad, y1 + pad);
        let scale = (WIDTH - 2.0 * MARGIN) / (x1 - x0).max(y1 - y0);
        View {
            x0,
            y0,
            scale,
            height: (y1 - y0) * scale + 2.0 * MARGIN,
        }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        (
            MARGIN + (x - self.x0) * self.scale,
            self.height - MARGIN - (y - self.y0) * self.scale,
        )
    }
}

fn corners(center: [f64; 3], size: [f64; 3], yaw: f64) -> [[f64; 2]; 4] {
    let (s, c) = yaw.sin_cos();
    let (l, w) = (size[0] / 2.0, size[1] / 2.0);
    [(l, w), (-l, w), (-l, -w), (l, -w)].map(|(a, b)| [center[0] + a * c - b * s, center[1] + a * s + b * c])
}

fn polygon(out: &mut String, v: &View, pts: &[[f64; 2]; 4], attrs: &str) {
    let points: Vec<String> = pts
        .iter()
        .map(|p| {
            let (x, y) = v.px(p[0], p[1]);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(out, r#"<polygon points="{}" {attrs}/>"#, points.join(" "));
}

fn axes(out: &mut String, v: &View) {
    let (left, bottom) = (MARGIN, v.height - MARGIN);
    let right = WIDTH - MARGIN;
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="black" stroke-width="1"><line x1="{left}" y1="{bottom:.2}" x2="{right}" y2="{bottom:.2}"/><line x1="{left}" y1="{bottom:.2}" x2="{left}" y2="{MARGIN}"/></g>"#
    );
    let span = (WIDTH - 2.0 * MARGIN) / v.scale;
    let step = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0]
        .into_iter()
        .find(|s| span / s <= 10.0)
        .unwrap_or(1000.0);
    let mut t = (v.x0 / step).ceil() * step;
    while t <= v.x0 + span {
        let (x, _) = v.px(t, v.y0);
        let _ = writeln!(
            out,
            r#"<text class="tick" x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{t}</text>"#,
            bottom + 14.0
        );
        t += step;
    }
    let top = v.y0 + (v.height - 2.0 * MARGIN) / v.scale;
    let mut t = (v.y0 / step).ceil() * step;
    while t <= top {
        let (_, y) = v.px(v.x0, t);
        let _ = writeln!(
            out,
            r#"<text class="tick" x="{:.2}" y="{y:.2}" font-size="10" text-anchor="end">{t}</text>"#,
            left - 4.0
        );
        t += step;
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-size="12">x [m]</text><text x="4" y="{:.2}" font-size="12">y [m]</text>"#,
        right - 30.0,
        v.height - 6.0,
        MARGIN - 10.0
    );
}

fn render(v: &View, title: &str, tracks: &[TrackRecord], detections: &[([f64; 3], [f64; 3], f64)]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{:.0}" viewBox="0 0 {WIDTH} {:.2}">"#,
        v.height.ceil(),
        v.height
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="20" font-size="14">{}</text>"#, escape(title));
    axes(&mut out, v);
    for (c, s, yaw) in detections {
        polygon(
            &mut out,
            v,
            &corners(*c, *s, *yaw),
            r#"class="detection" fill="none" stroke="gray" stroke-dasharray="3,2""#,
        );
    }
    for t in tracks {
        let color = track_color(&t.tracking_id);
        let id = escape(&t.tracking_id);
        polygon(
            &mut out,
            v,
            &corners(t.translation, t.size, t.rotation_yaw),
            &format!(r#"class="track" data-id="{id}" fill="{color}" fill-opacity="0.5" stroke="{color}""#),
        );
        let (x, y) = v.px(t.translation[0], t.translation[1]);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{y:.2}" font-size="9">{id}</text>"#);
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn file_stem(scene: &str) -> String {
    scene
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Writes one BEV SVG per scene frame: tracks as filled rectangles coloured
/// by track ID, detections (when given) as dashed outlines. `frames`
/// restricts output to the listed frame indices. The view is fixed per
/// scene so frames line up.
pub fn emit_plots(
    results: &ResultsFile,
    detections: Option<&[SceneDetections]>,
    frames: Option<&[u64]>,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let wanted: Option<BTreeSet<u64>> = frames.map(|f| f.iter().copied().collect());
    let mut written = Vec::new();
    for scene in &results.scenes {
        let dets = detections.and_then(|d| d.iter().find(|s| s.scene == scene.scene));
        let det_boxes = |k: u64| -> Vec<([f64; 3], [f64; 3], f64)> {
            dets.and_then(|s| s.frames.iter().find(|f| f.frame_index == k))
                .map(|f| {
                    f.detections
                        .iter()
                        .map(|d| ([d.center[0], d.center[1], d.passthrough.z], d.passthrough.size, d.passthrough.yaw))
                        .collect()
                })
                .unwrap_or_default()
        };
        let view = View::new(
            scene
                .frames
                .iter()
                .flat_map(|f| f.tracks.iter().map(|t| [t.translation[0], t.translation[1]]))
                .chain(dets.into_iter().flat_map(|s| s.frames.iter().flat_map(|f| f.detections.iter().map(|d| d.center)))),
        );
        for f in &scene.frames {
            if wanted.as_ref().is_some_and(|w| !w.contains(&f.frame_index)) {
                continue;
            }
            let title = format!("{} frame {} t={:.2}s", scene.scene, f.frame_index, f.timestamp);
            let svg = render(&view, &title, &f.tracks, &det_boxes(f.frame_index));
            let path = out_dir.join(format!("{}_{:06}.svg", file_stem(&scene.scene), f.frame_index));
            std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}
