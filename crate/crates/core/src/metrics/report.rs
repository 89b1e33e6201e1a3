use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::sweep::{amota, amotp, recall_sweep};
use super::{evaluate_at, mota, motp, EvalScene, FrameCounts, MatchConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub amota: f64,
    pub amotp: f64,
    /// Secondary metrics, taken at the sweep point with the highest MOTA.
    pub mota: f64,
    pub motp: f64,
    pub recall: f64,
    pub threshold: f64,
    pub counts: FrameCounts,
    pub sweep_points: usize,
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub match_config: MatchConfig,
    /// Simple mean over classes with ground truth.
    pub amota: f64,
    pub amotp: f64,
    pub totals: FrameCounts,
    pub classes: Vec<ClassMetrics>,
}

pub(crate) const REPORT_SCHEMA_VERSION: u32 = 1;

fn class_metrics(class: &str, scenes: &[EvalScene], cfg: &MatchConfig) -> Result<ClassMetrics> {
    let sweep = recall_sweep(scenes, cfg)?;
    if sweep.points.is_empty() {
        let counts = evaluate_at(scenes, cfg, f64::NEG_INFINITY);
        let (amota_v, amotp_v) = if sweep.gt == 0 {
            (f64::NAN, f64::NAN)
        } else {
            (0.0, cfg.match_distance)
        };
        return Ok(ClassMetrics {
            class: class.to_string(),
            amota: amota_v,
            amotp: amotp_v,
            mota: mota(&counts),
            motp: motp(counts.distance_sum, counts.tp),
            recall: counts.recall(),
            threshold: f64::NEG_INFINITY,
            counts,
            sweep_points: 0,
            diagnostic: sweep.diagnostic,
        });
    }
    let best = sweep
        .points
        .iter()
        .fold(None::<&super::SweepPoint>, |best, p| match best {
            Some(b) if b.mota >= p.mota => Some(b),
            _ => Some(p),
        })
        .expect("sweep is not empty");
    Ok(ClassMetrics {
        class: class.to_string(),
        amota: amota(&sweep),
        amotp: amotp(&sweep),
        mota: best.mota,
        motp: best.motp,
        recall: best.recall,
        threshold: best.threshold,
        counts: best.counts,
        sweep_points: sweep.points.len(),
        diagnostic: None,
    })
}

/// Metrics per class and their mean. `classes` pairs a class label with its
/// scenes.
pub fn evaluate_classes(classes: &[(String, Vec<EvalScene>)], cfg: &MatchConfig) -> Result<MetricsReport> {
    let per_class = classes
        .iter()
        .map(|(name, scenes)| class_metrics(name, scenes, cfg))
        .collect::<Result<Vec<_>>>()?;
    let scored: Vec<&ClassMetrics> = per_class.iter().filter(|c| !c.amota.is_nan()).collect();
    let mean = |f: fn(&ClassMetrics) -> f64| {
        if scored.is_empty() {
            f64::NAN
        } else {
            scored.iter().map(|c| f(c)).sum::<f64>() / scored.len() as f64
        }
    };
    let mut totals = FrameCounts::default();
    for c in &per_class {
        totals += c.counts;
    }
    Ok(MetricsReport {
        schema_version: REPORT_SCHEMA_VERSION,
        match_config: *cfg,
        amota: mean(|c| c.amota),
        amotp: mean(|c| c.amotp),
        totals,
        classes: per_class,
    })
}

/// Plain-text table: AMOTA, AMOTP, MT, ML, TP, FP, FN, IDS, FRAG.
pub fn format_table(r: &MetricsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:>7} {:>7} {:>6} {:>6} {:>8} {:>8} {:>8} {:>6} {:>6}",
        "class", "AMOTA", "AMOTP", "MT", "ML", "TP", "FP", "FN", "IDS", "FRAG"
    );
    let mut row = |name: &str, a: f64, p: f64, c: &FrameCounts| {
        let _ = writeln!(
            out,
            "{:<12} {:>7.3} {:>7.3} {:>6} {:>6} {:>8} {:>8} {:>8} {:>6} {:>6}",
            name, a, p, c.mt, c.ml, c.tp, c.fp, c.fn_, c.ids, c.frag
        );
    };
    for c in &r.classes {
        row(&c.class, c.amota, c.amotp, &c.counts);
    }
    row("overall", r.amota, r.amotp, &r.totals);
    out
}
