"""Command-line surface: detect / simulate / eval / overlay."""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import bundle as bundle_io
from .detect import DetectorConfig, Mode
from .events import analyze_scene, report_to_json
from .evaluate import (EvaluationError, evaluate_dataset, run_ablation,
                       rows_to_table, summary_to_dict)
from .overlay import OverlayError, render_overlay
from .simulate import (GenerationError, NoiseSpec, SimParams, apply_noise,
                       render_world, sample_ambiguous_world, sample_world,
                       truth_from_json, truth_to_json)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INTERNAL_ERROR = 2


def _thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("JOINTGAZE_THREADS", "1")))
    except ValueError:
        return 1


def _detector_config(args) -> DetectorConfig:
    return DetectorConfig(
        depth_tolerance_m=args.tolerance,
        mode=Mode.THREE_D if args.mode == "3d" else Mode.TWO_D,
        face_width_m=args.face_width,
    )


def _add_detector_flags(p: argparse.ArgumentParser):
    p.add_argument("--mode", choices=["3d", "2d"], default="3d")
    p.add_argument("--tolerance", type=float, default=0.3,
                   help="depth match tolerance in meters")
    p.add_argument("--face-width", type=float, default=0.15,
                   help="average face width in meters")


def cmd_detect(args) -> int:
    scene = bundle_io.read_scene_bundle(args.bundle)
    report = analyze_scene(scene, _detector_config(args))
    out_path = Path(args.out) if args.out else Path(args.bundle).with_suffix(
        ".report.json")
    out_path.write_text(report_to_json(report))
    if args.overlay:
        svg_path = out_path.with_suffix(".svg")
        svg_path.write_text(render_overlay(scene, report))
    for caption in report.captions:
        print(caption)
    print(f"report written to {out_path}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.n <= 0:
        print("error: empty dataset (--n must be positive)", file=sys.stderr)
        return EXIT_INPUT_ERROR
    params = SimParams(n_agents=args.agents, n_objects=args.objects,
                       p_joint=args.p_joint)
    out_dir = Path(args.out)
    scenes_dir = out_dir / "scenes"
    truth_dir = out_dir / "truth"
    scenes_dir.mkdir(parents=True, exist_ok=True)
    truth_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    n_positive = 0
    for i in range(args.n):
        scene_seed = np.random.SeedSequence([args.seed, i, 0])
        if args.ambiguity:
            world = sample_ambiguous_world(scene_seed, params)
        else:
            world = sample_world(scene_seed, params)
        scene_id = f"scene_{i:04d}"
        scene, truth = render_world(world, scene_id=scene_id)
        if args.gaze_noise_deg > 0 or args.depth_noise_m > 0:
            noise_seed = int(np.random.SeedSequence(
                [args.seed, i, 1]).generate_state(1)[0])
            scene = apply_noise(scene, NoiseSpec(
                gaze_sigma_deg=args.gaze_noise_deg,
                depth_sigma_m=args.depth_noise_m, seed=noise_seed))
        manifest_path = bundle_io.write_scene_bundle(scene, scenes_dir,
                                                    stem=scene_id)
        truth_path = truth_dir / f"{scene_id}.truth.json"
        truth_path.write_text(truth_to_json(truth))
        if truth.has_joint_attention:
            n_positive += 1
        entries.append({
            "scene_id": scene_id,
            "bundle": str(manifest_path.relative_to(out_dir)),
            "truth": str(truth_path.relative_to(out_dir)),
            "true_ja": truth.has_joint_attention,
        })

    manifest = {
        "n": args.n, "seed": args.seed, "p_joint": args.p_joint,
        "ambiguity": bool(args.ambiguity),
        "gaze_noise_deg": args.gaze_noise_deg,
        "depth_noise_m": args.depth_noise_m,
        "n_positive": n_positive, "n_negative": args.n - n_positive,
        "scenes": entries,
    }
    # manifest last, so a complete manifest implies a complete dataset
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {args.n} scenes ({n_positive} positive, "
          f"{args.n - n_positive} negative) to {out_dir}")
    return EXIT_OK


def load_dataset(dataset_dir):
    dataset_dir = Path(dataset_dir)
    manifest_path = dataset_dir / "manifest.json"
    if not manifest_path.exists():
        raise EvaluationError(f"no manifest.json in {dataset_dir}")
    manifest = json.loads(manifest_path.read_text())
    pairs = []
    for entry in manifest["scenes"]:
        truth_path = dataset_dir / entry["truth"]
        if not truth_path.exists():
            raise EvaluationError(f"missing ground truth {entry['truth']}")
        scene = bundle_io.read_scene_bundle(dataset_dir / entry["bundle"])
        pairs.append((scene, truth_from_json(truth_path.read_text())))
    return pairs


def _print_summary(tag: str, summary) -> None:
    iou = ("n/a" if summary.mean_target_iou is None
           else f"{summary.mean_target_iou:.3f}")
    print(f"{tag}: mean IOU {iou}, agent acc {summary.agent_accuracy:.3f}, "
          f"JA classification acc {summary.ja_classification_accuracy:.3f} "
          f"({summary.n_scenes} scenes)")


def cmd_eval(args) -> int:
    pairs = load_dataset(args.dataset)
    config = _detector_config(args)
    out_dir = Path(args.out) if args.out else Path(args.dataset)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.ablation:
        pair = run_ablation(pairs, config)
        results = {"3d": pair.three_d, "2d": pair.two_d}
    else:
        n_workers = _thread_cap()
        if n_workers > 1:
            # chunked parallel evaluation; aggregation stays a deterministic
            # fold because evaluate_dataset re-sorts by scene_id
            chunks = [pairs[i::n_workers] for i in range(n_workers)]
            chunks = [c for c in chunks if c]
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                partials = list(pool.map(
                    lambda c: evaluate_dataset(c, config), chunks))
            all_rows = sorted((r for p in partials for r in p.rows),
                              key=lambda r: r.scene_id)
            summary = _merge_rows(all_rows)
        else:
            summary = evaluate_dataset(pairs, config)
        results = {config.mode.value: summary}
    for tag, summary in results.items():
        _print_summary(tag, summary)
        (out_dir / f"summary_{tag}.json").write_text(
            json.dumps(summary_to_dict(summary), indent=2) + "\n")
        (out_dir / f"rows_{tag}.tsv").write_text(rows_to_table(summary.rows))
    return EXIT_OK


def _merge_rows(rows):
    from .evaluate import EvalSummary
    positives = [r.target_iou for r in rows if r.target_iou is not None]
    return EvalSummary(
        n_scenes=len(rows),
        mean_target_iou=(sum(positives) / len(positives)) if positives else None,
        agent_accuracy=sum(r.agent_accuracy for r in rows) / len(rows),
        ja_classification_accuracy=sum(
            1 for r in rows if r.predicted_ja == r.true_ja) / len(rows),
        rows=rows,
    )


def cmd_overlay(args) -> int:
    scene = bundle_io.read_scene_bundle(args.bundle)
    report_data = json.loads(Path(args.report).read_text())
    from .detect import Candidate, TargetDetection, NoTargetReason
    from .events import JointAttentionEvent, SceneReport
    detections = []
    for fd in report_data["faces"]:
        if "target_segment_id" in fd:
            cand = Candidate(
                segment_id=fd["target_segment_id"],
                hit_px=tuple(fd["hit_px"]),
                pixel_distance=fd["pixel_distance"],
                ray_depth_m=fd["ray_depth_m"],
                region_depth_m=fd["region_depth_m"])
            detections.append(TargetDetection(fd["face_id"], target=cand))
        else:
            detections.append(TargetDetection(
                fd["face_id"],
                no_target_reason=NoTargetReason(fd["no_target_reason"])))
    events = [JointAttentionEvent(e["segment_id"], frozenset(e["face_ids"]))
              for e in report_data["events"]]
    report = SceneReport(report_data["scene_id"], detections, events,
                         report_data["captions"])
    out_path = Path(args.out) if args.out else Path(args.report).with_suffix(".svg")
    out_path.write_text(render_overlay(scene, report))
    print(f"overlay written to {out_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="jointgaze",
        description="Joint visual attention detection on fused scene inputs")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="detect gaze targets in a scene bundle")
    d.add_argument("bundle", help="path to the scene manifest (.json)")
    _add_detector_flags(d)
    d.add_argument("--overlay", action="store_true")
    d.add_argument("--out")
    d.set_defaults(func=cmd_detect)

    s = sub.add_parser("simulate", help="generate a synthetic dataset")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--p-joint", type=float, default=0.5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--agents", type=int, default=2)
    s.add_argument("--objects", type=int, default=3)
    s.add_argument("--gaze-noise-deg", type=float, default=0.0)
    s.add_argument("--depth-noise-m", type=float, default=0.0)
    s.add_argument("--ambiguity", action="store_true",
                   help="plant a depth-mismatched distractor on every ray")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("eval", help="evaluate a dataset with ground truth")
    e.add_argument("dataset", help="dataset directory with manifest.json")
    _add_detector_flags(e)
    e.add_argument("--ablation", action="store_true")
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    o = sub.add_parser("overlay", help="render an SVG overlay for a report")
    o.add_argument("bundle")
    o.add_argument("report")
    o.add_argument("--out")
    o.set_defaults(func=cmd_overlay)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (bundle_io.ParseError, OverlayError, EvaluationError,
            GenerationError, FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except Exception as e:  # pragma: no cover
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
