#!/usr/bin/env python3
"""Convert nuScenes detection results (and optionally ground truth) into the
gnnpmb JSON formats.

Only the raw nuScenes metadata tables are read (sample.json, scene.json and,
for ground truth, sample_annotation.json, instance.json, category.json); the
nuScenes devkit is not needed.

    python3 nuscenes_to_gnnpmb.py \
        --dataroot /data/nuscenes --version v1.0-trainval \
        --results detections_val.json --out detections.json \
        --gt-out ground_truth.json
"""

import argparse
import json
import math
import os
import sys
from collections import defaultdict

SCHEMA_VERSION = 1

TRACKING_CLASSES = {"bicycle", "bus", "car", "motorcycle", "pedestrian", "trailer", "truck"}

CATEGORY_TO_CLASS = {
    "vehicle.bicycle": "bicycle",
    "vehicle.bus.bendy": "bus",
    "vehicle.bus.rigid": "bus",
    "vehicle.car": "car",
    "vehicle.motorcycle": "motorcycle",
    "human.pedestrian.adult": "pedestrian",
    "human.pedestrian.child": "pedestrian",
    "human.pedestrian.construction_worker": "pedestrian",
    "human.pedestrian.police_officer": "pedestrian",
    "vehicle.trailer": "trailer",
    "vehicle.truck": "truck",
}


def load_table(dataroot, version, name):
    with open(os.path.join(dataroot, version, name + ".json")) as f:
        return json.load(f)


def yaw_from_quaternion(q):
    w, x, y, z = q
    return math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))


def scene_frames(samples, scenes, wanted_tokens):
    """Ordered sample tokens per scene, restricted to scenes that contain
    one of `wanted_tokens`."""
    by_token = {s["token"]: s for s in samples}
    wanted_scenes = {by_token[t]["scene_token"] for t in wanted_tokens if t in by_token}
    out = []
    for scene in scenes:
        if scene["token"] not in wanted_scenes:
            continue
        tokens = []
        t = scene["first_sample_token"]
        while t:
            tokens.append(t)
            t = by_token[t]["next"]
        out.append((scene["name"], [(t, by_token[t]["timestamp"]) for t in tokens]))
    out.sort(key=lambda s: s[0])
    return out


def convert_detections(results, frames):
    scenes_out = []
    for name, tokens in frames:
        t0 = tokens[0][1]
        out_frames = []
        for k, (token, ts) in enumerate(tokens):
            dets = []
            for d in results.get(token, []):
                if d["detection_name"] not in TRACKING_CLASSES:
                    continue
                dets.append(
                    {
                        "translation": d["translation"],
                        "size": [d["size"][1], d["size"][0], d["size"][2]],
                        "rotation_yaw": yaw_from_quaternion(d["rotation"]),
                        "velocity": list(d.get("velocity", [0.0, 0.0]))[:2],
                        "detection_name": d["detection_name"],
                        "detection_score": d["detection_score"],
                    }
                )
            out_frames.append({"frame_index": k, "timestamp": (ts - t0) * 1e-6, "detections": dets})
        scenes_out.append({"scene": name, "frames": out_frames})
    return {"schema_version": SCHEMA_VERSION, "scenes": scenes_out}


def convert_ground_truth(dataroot, version, frames):
    annotations = load_table(dataroot, version, "sample_annotation")
    instances = {i["token"]: i for i in load_table(dataroot, version, "instance")}
    categories = {c["token"]: c["name"] for c in load_table(dataroot, version, "category")}
    by_sample = defaultdict(list)
    for a in annotations:
        by_sample[a["sample_token"]].append(a)
    scenes_out = []
    for name, tokens in frames:
        t0 = tokens[0][1]
        out_frames = []
        for k, (token, ts) in enumerate(tokens):
            objects = []
            for a in by_sample.get(token, []):
                inst = instances[a["instance_token"]]
                cls = CATEGORY_TO_CLASS.get(categories[inst["category_token"]])
                if cls is None or a["num_lidar_pts"] + a["num_radar_pts"] == 0:
                    continue
                objects.append(
                    {
                        "translation": a["translation"],
                        "size": [a["size"][1], a["size"][0], a["size"][2]],
                        "rotation_yaw": yaw_from_quaternion(a["rotation"]),
                        "velocity": [0.0, 0.0],
                        "instance_id": a["instance_token"],
                        "tracking_name": cls,
                    }
                )
            out_frames.append({"frame_index": k, "timestamp": (ts - t0) * 1e-6, "objects": objects})
        scenes_out.append({"scene": name, "frames": out_frames})
    return {"schema_version": SCHEMA_VERSION, "scenes": scenes_out}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--dataroot", required=True)
    p.add_argument("--version", default="v1.0-trainval")
    p.add_argument("--results", required=True, help="nuScenes detection results JSON")
    p.add_argument("--out", required=True, help="gnnpmb detections file to write")
    p.add_argument("--gt-out", help="also write ground truth for the same scenes")
    args = p.parse_args(argv)

    with open(args.results) as f:
        results = json.load(f)["results"]
    samples = load_table(args.dataroot, args.version, "sample")
    scenes = load_table(args.dataroot, args.version, "scene")
    frames = scene_frames(samples, scenes, results.keys())
    if not frames:
        sys.exit("no result sample tokens match the nuScenes metadata")

    with open(args.out, "w") as f:
        json.dump(convert_detections(results, frames), f)
    if args.gt_out:
        with open(args.gt_out, "w") as f:
            json.dump(convert_ground_truth(args.dataroot, args.version, frames), f)
    print(f"{len(frames)} scenes, {sum(len(t) for _, t in frames)} frames")


if __name__ == "__main__":
    main()
