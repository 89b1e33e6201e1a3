use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{Diagnostics, GnnPmbTracker};
use crate::metrics::{evaluate_classes, format_table, EvalFrame, EvalScene, GtBox, MatchConfig, MetricsReport, PredBox};
use crate::state::{ObjectClass, TrackOutput};

use super::schema::*;
use super::{emit_plots, load_detections, load_ground_truth, load_results, track_record, write_json, RunConfig, SceneDetections};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSummary {
    pub scene: String,
    pub class: ObjectClass,
    pub frames: usize,
    pub track_outputs: usize,
    pub distinct_ids: usize,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub results: PathBuf,
    pub metrics: Option<PathBuf>,
    pub streams: Vec<StreamSummary>,
}

fn add(total: &mut Diagnostics, d: &Diagnostics) {
    total.gated_pairs += d.gated_pairs;
    total.new_bernoullis += d.new_bernoullis;
    total.pruned_bernoullis += d.pruned_bernoullis;
    total.pruned_ppp += d.pruned_ppp;
    total.pruned_local_hypotheses += d.pruned_local_hypotheses;
}

fn track_stream(
    scene: &SceneDetections,
    class: ObjectClass,
    cfg: &RunConfig,
) -> Result<(Vec<Vec<TrackOutput>>, StreamSummary)> {
    let mut tracker = GnnPmbTracker::new(class, cfg.params_for(class)?)?;
    let mut out = Vec::with_capacity(scene.frames.len());
    let mut diagnostics = Diagnostics::default();
    for frame in scene.class_stream(class) {
        let r = tracker.process(&frame).map_err(|e| Error::Context {
            scene: scene.scene.clone(),
            frame: frame.frame_index,
            class: class.to_string(),
            source: Box::new(e),
        })?;
        add(&mut diagnostics, &r.diagnostics);
        out.push(r.tracks);
    }
    let ids: BTreeSet<u64> = out.iter().flatten().map(|t| t.track_id).collect();
    let summary = StreamSummary {
        scene: scene.scene.clone(),
        class,
        frames: out.len(),
        track_outputs: out.iter().map(Vec::len).sum(),
        distinct_ids: ids.len(),
        diagnostics,
    };
    Ok((out, summary))
}

/// Tracks every (scene, class) pair of the input and writes
/// `results.json` and `diagnostics.json` to the output directory, plus
/// `metrics.json`/`metrics.txt` when ground truth is configured and SVG
/// frames when plotting is on. Output is independent of the parallelism.
pub fn run_tracking(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let scenes = load_detections(&cfg.input)?;
    let requested = cfg.requested_classes()?;
    let units: Vec<(usize, ObjectClass)> = scenes
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            let classes = requested.clone().unwrap_or_else(|| s.classes());
            classes.into_iter().map(move |c| (i, c))
        })
        .collect();
    info!("tracking {} scene/class streams", units.len());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("parallelism: {e}")))?;
    let outputs = pool.install(|| {
        units
            .par_iter()
            .map(|&(i, class)| track_stream(&scenes[i], class, cfg))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut per_scene: Vec<Vec<Vec<TrackOutput>>> = scenes.iter().map(|s| vec![Vec::new(); s.frames.len()]).collect();
    let mut streams = Vec::with_capacity(outputs.len());
    for (&(i, _), (frames, summary)) in units.iter().zip(outputs) {
        for (slot, tracks) in per_scene[i].iter_mut().zip(frames) {
            slot.extend(tracks);
        }
        streams.push(summary);
    }
    let results = ResultsFile {
        schema_version: SCHEMA_VERSION,
        scenes: scenes
            .iter()
            .zip(per_scene)
            .map(|(s, frames)| ResultsSceneRecord {
                scene: s.scene.clone(),
                frames: s
                    .frames
                    .iter()
                    .zip(frames)
                    .map(|(f, tracks)| ResultsFrameRecord {
                        frame_index: f.frame_index,
                        timestamp: f.timestamp,
                        tracks: tracks.iter().map(track_record).collect(),
                    })
                    .collect(),
            })
            .collect(),
    };
    let results_path = cfg.output_dir.join("results.json");
    write_json(&results_path, &results)?;
    write_json(&cfg.output_dir.join("diagnostics.json"), &streams)?;

    let metrics = match &cfg.ground_truth {
        Some(gt) => {
            let report = evaluate(&results_path, gt, &cfg.metrics)?;
            Some(write_report(&cfg.output_dir, &report)?)
        }
        None => None,
    };
    if cfg.plot {
        emit_plots(&results, Some(&scenes), None, &cfg.output_dir.join("plots"))?;
    }
    Ok(RunSummary {
        schema_version: SCHEMA_VERSION,
        results: results_path,
        metrics,
        streams,
    })
}

/// Writes `metrics.json` and `metrics.txt`; returns the JSON path.
pub fn write_report(dir: &Path, report: &MetricsReport) -> Result<PathBuf> {
    let path = dir.join("metrics.json");
    write_json(&path, report)?;
    let txt = dir.join("metrics.txt");
    std::fs::write(&txt, format_table(report)).map_err(|e| Error::io(&txt, e))?;
    Ok(path)
}

/// Metrics of a results file against a ground-truth file.
pub fn evaluate(results: &Path, ground_truth: &Path, cfg: &MatchConfig) -> Result<MetricsReport> {
    if !ground_truth.exists() {
        return Err(Error::io(
            ground_truth,
            std::io::Error::new(std::io::ErrorKind::NotFound, "ground-truth file not found"),
        ));
    }
    let gt = load_ground_truth(ground_truth)?;
    let res = load_results(results)?;
    evaluate_classes(&evaluation_input(&res, &gt), cfg)
}

/// Groups results and ground truth into per-class scenes of aligned
/// frames. Scenes and frames present on either side are included.
pub fn evaluation_input(results: &ResultsFile, gt: &GroundTruthFile) -> Vec<(String, Vec<EvalScene>)> {
    type Frames = BTreeMap<u64, EvalFrame>;
    let mut by_class: BTreeMap<String, BTreeMap<String, Frames>> = BTreeMap::new();
    let mut scenes: BTreeSet<&str> = BTreeSet::new();
    let mut frames: BTreeMap<&str, BTreeSet<u64>> = BTreeMap::new();
    for s in &gt.scenes {
        scenes.insert(&s.scene);
        for f in &s.frames {
            frames.entry(&s.scene).or_default().insert(f.frame_index);
            for o in &f.objects {
                by_class
                    .entry(o.tracking_name.clone())
                    .or_default()
                    .entry(s.scene.clone())
                    .or_default()
                    .entry(f.frame_index)
                    .or_default()
                    .gt
                    .push(GtBox {
                        id: o.instance_id.clone(),
                        center: [o.translation[0], o.translation[1]],
                    });
            }
        }
    }
    for s in &results.scenes {
        scenes.insert(&s.scene);
        for f in &s.frames {
            frames.entry(&s.scene).or_default().insert(f.frame_index);
            for t in &f.tracks {
                by_class
                    .entry(t.tracking_name.clone())
                    .or_default()
                    .entry(s.scene.clone())
                    .or_default()
                    .entry(f.frame_index)
                    .or_default()
                    .pred
                    .push(PredBox {
                        id: t.tracking_id.clone(),
                        center: [t.translation[0], t.translation[1]],
                        score: t.tracking_score,
                    });
            }
        }
    }
    by_class
        .into_iter()
        .map(|(class, mut per_scene)| {
            let eval_scenes = scenes
                .iter()
                .map(|scene| {
                    let mut f = per_scene.remove(*scene).unwrap_or_default();
                    EvalScene {
                        frames: frames[scene].iter().map(|k| f.remove(k).unwrap_or_default()).collect(),
                    }
                })
                .collect();
            (class, eval_scenes)
        })
        .collect()
}
