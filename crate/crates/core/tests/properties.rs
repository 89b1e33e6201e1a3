mod common;

use std::collections::HashSet;

use proptest::prelude::*;

use gnnpmb::association::{enumerate_hypotheses, hungarian_solve, murty_kbest, CostMatrix};
use gnnpmb::filter::{FilterParams, GnnPmbTracker};
use gnnpmb::metrics::{evaluate_classes, MatchConfig};
use gnnpmb::preprocess::{iou_3d, nms, score_filter, Box3D};
use gnnpmb::sim::{simulate, SimConfig};
use gnnpmb::state::{Detection, FrameDetections, ObjectClass, PassthroughState, PmbPosterior};

use common::{eval_scene, track_gnn};

fn cost() -> impl Strategy<Value = f64> {
    prop_oneof![4 => -5.0..5.0f64, 1 => Just(f64::INFINITY)]
}

fn cost_matrix() -> impl Strategy<Value = CostMatrix> {
    (0usize..=4, 1usize..=4, any::<bool>()).prop_flat_map(|(n, p, with_clutter)| {
        (
            prop::collection::vec(prop::collection::vec(cost(), n), p),
            prop::collection::vec(0.0..5.0f64, n),
            prop::collection::vec(0.0..8.0f64, p),
            prop::collection::vec(0.0..8.0f64, p),
        )
            .prop_map(move |(d, m, nt, cl)| CostMatrix::new(d, m, nt, with_clutter.then_some(cl)).unwrap())
    })
}

fn boxes() -> impl Strategy<Value = Box3D> {
    (
        -3.0..3.0f64,
        -3.0..3.0f64,
        -0.5..0.5f64,
        0.5..5.0f64,
        0.5..3.0f64,
        0.5..3.0f64,
        -3.2..3.2f64,
        0.0..1.0f64,
    )
        .prop_map(|(x, y, z, l, w, h, yaw, score)| Box3D {
            center: [x, y, z],
            size: [l, w, h],
            yaw,
            score,
        })
}

fn detection(b: &Box3D) -> Detection {
    Detection {
        center: [b.center[0], b.center[1]],
        passthrough: PassthroughState {
            z: b.center[2],
            size: b.size,
            yaw: b.yaw,
            velocity: [0.0, 0.0],
            detection_score: b.score,
            class_name: ObjectClass::Car,
        },
        frame_index: 0,
        timestamp: 0.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hungarian_is_enumeration_minimum(c in cost_matrix()) {
        let best = enumerate_hypotheses(&c)
            .unwrap()
            .into_iter()
            .map(|h| h.cost)
            .fold(f64::INFINITY, f64::min);
        prop_assert_eq!(hungarian_solve(&c).unwrap().cost, best);
    }

    #[test]
    fn murty_ranks_distinct_hypotheses(c in cost_matrix(), k in 1usize..8) {
        let kb = murty_kbest(&c, k).unwrap();
        prop_assert!(!kb.is_empty());
        prop_assert_eq!(kb[0].cost, hungarian_solve(&c).unwrap().cost);
        prop_assert!(kb.windows(2).all(|w| w[0].cost <= w[1].cost));
        let keys: HashSet<_> = kb.iter().map(|h| h.key()).collect();
        prop_assert_eq!(keys.len(), kb.len());
        for h in &kb {
            prop_assert_eq!(c.hypothesis_cost(&h.measurements), h.cost);
        }
        // A longer list extends a shorter one.
        let more = murty_kbest(&c, k + 2).unwrap();
        let a: Vec<f64> = kb.iter().map(|h| h.cost).collect();
        let b: Vec<f64> = more.iter().take(kb.len()).map(|h| h.cost).collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn shifting_a_measurement_row_keeps_the_argmin(c in cost_matrix(), row in 0usize..4, shift in -3.0..3.0f64) {
        let row = row % c.n_measurements();
        let mut s = c.clone();
        for v in s.detection[row].iter_mut() {
            *v += shift;
        }
        s.new_track[row] += shift;
        if let Some(cl) = s.clutter.as_mut() {
            cl[row] += shift;
        }
        let a = hungarian_solve(&c).unwrap();
        let b = hungarian_solve(&s).unwrap();
        prop_assert!((b.cost - a.cost - shift).abs() < 1e-9);
        prop_assert!((c.hypothesis_cost(&b.measurements) - a.cost).abs() < 1e-9);
    }

    #[test]
    fn iou_symmetric_and_bounded(a in boxes(), b in boxes()) {
        let ab = iou_3d(&a, &b);
        let ba = iou_3d(&b, &a);
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!((iou_3d(&a, &a) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn nms_idempotent_and_commutes_with_score_filter(
        bs in prop::collection::vec(boxes(), 0..25),
        nms_thr in 0.0..0.9f64,
        score_thr in 0.0..0.9f64,
    ) {
        let dets: Vec<Detection> = bs.iter().map(detection).collect();
        let once = nms(&dets, nms_thr);
        prop_assert_eq!(nms(&once, nms_thr), once.clone());
        prop_assert_eq!(
            nms(&score_filter(&dets, score_thr), nms_thr),
            score_filter(&once, score_thr)
        );
        for (i, a) in once.iter().enumerate() {
            for b in &once[i + 1..] {
                prop_assert!(iou_3d(&Box3D::from_detection(a), &Box3D::from_detection(b)) <= nms_thr);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn existence_never_grows_without_detections(seed in 0u64..1000, warm in 2usize..10, empty in 1usize..6) {
        let s = simulate(&SimConfig { seed, frames: warm as u64, ..SimConfig::default() }).unwrap();
        let mut t = GnnPmbTracker::new(ObjectClass::Car, FilterParams::default()).unwrap();
        for f in &s.detections {
            t.process(f).unwrap();
        }
        let mut prev = t.posterior().clone();
        for k in 0..empty {
            let frame = FrameDetections {
                frame_index: (warm + k) as u64,
                timestamp: (warm + k) as f64 * 0.5,
                detections: vec![],
            };
            t.process(&frame).unwrap();
            let next = t.posterior();
            for b in &next.bernoullis {
                let before = prev.bernoullis.iter().find(|p| p.track_id == b.track_id).unwrap();
                prop_assert!(b.existence <= before.existence);
            }
            prev = next.clone();
        }
    }

    #[test]
    fn tracking_is_deterministic_and_resumable(seed in 0u64..1000, split in 1usize..20) {
        let s = simulate(&SimConfig { seed, frames: 20, ..SimConfig::default() }).unwrap();
        let params = FilterParams::default();
        let a = track_gnn(&s, ObjectClass::Car, &params);
        prop_assert_eq!(&a, &track_gnn(&s, ObjectClass::Car, &params));

        // Serialize the posterior mid-stream and continue from the copy.
        let mut t = GnnPmbTracker::new(ObjectClass::Car, params.clone()).unwrap();
        for f in &s.detections[..split] {
            t.process(f).unwrap();
        }
        let json = serde_json::to_string(t.posterior()).unwrap();
        let restored: PmbPosterior = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&restored, t.posterior());
        let mut r = GnnPmbTracker::with_posterior(ObjectClass::Car, params, restored).unwrap();
        for (k, f) in s.detections.iter().enumerate().skip(split) {
            prop_assert_eq!(&r.process(f).unwrap().tracks, &a[k]);
        }
    }

    #[test]
    fn outputs_have_unique_ids_and_metrics_are_consistent(seed in 0u64..1000) {
        let s = simulate(&SimConfig { seed, frames: 25, birth_rate: 0.3, survival_probability: 0.95, ..SimConfig::default() }).unwrap();
        let out = track_gnn(&s, ObjectClass::Car, &FilterParams::default());
        for f in &out {
            let ids: HashSet<u64> = f.iter().map(|t| t.track_id).collect();
            prop_assert_eq!(ids.len(), f.len());
        }
        let r = evaluate_classes(&[("car".into(), vec![eval_scene(&s, &out)])], &MatchConfig::default()).unwrap();
        let c = &r.classes[0];
        prop_assert_eq!(c.counts.tp + c.counts.fn_, c.counts.gt);
        prop_assert!(c.counts.ids <= c.counts.tp);
        prop_assert!(c.counts.frag <= c.counts.tp);
        prop_assert!(c.counts.mt + c.counts.ml <= c.counts.trajectories);
        prop_assert!((0.0..=1.0).contains(&c.amota));
        prop_assert!(c.amotp >= 0.0 && c.amotp <= 3.0);
    }
}
