"""Metrics and the dataset harness, including the 3D-vs-2D ablation."""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

from .detect import DetectorConfig, Mode
from .events import analyze_scene, classify_agents
from .scene import SceneInput, rle_decode
from .simulate import GroundTruth


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class SceneRow:
    scene_id: str
    mode: str
    target_iou: Optional[float]  # None on negative scenes
    agent_accuracy: float
    n_faces: int
    predicted_ja: bool
    true_ja: bool


@dataclass(frozen=True)
class EvalSummary:
    n_scenes: int
    mean_target_iou: Optional[float]
    agent_accuracy: float
    ja_classification_accuracy: float
    rows: List[SceneRow]


@dataclass(frozen=True)
class AblationPair:
    three_d: EvalSummary
    two_d: EvalSummary


def mask_iou(a, b, n_pixels: Optional[int] = None) -> float:
    """Intersection over union of two pixel-index sets (or RLE lists).

    Both empty counts as full agreement (1.0); exactly one empty is 0.0.
    """
    sa = _as_index_set(a)
    sb = _as_index_set(b)
    if n_pixels is not None:
        for name, s in (("first", sa), ("second", sb)):
            if s and max(s) >= n_pixels:
                raise EvaluationError(f"{name} mask exceeds raster dimensions")
    if not sa and not sb:
        return 1.0
    union = len(sa | sb)
    return len(sa & sb) / union


def _as_index_set(mask) -> frozenset:
    if isinstance(mask, frozenset):
        return mask
    if isinstance(mask, (set, list, tuple)) and mask and isinstance(
            next(iter(mask)), (list, tuple)):
        return frozenset(int(i) for i in rle_decode([tuple(r) for r in mask]))
    return frozenset(int(i) for i in mask)


def agent_accuracy(predicted: Dict[int, str], truth: Dict[int, str]) -> float:
    """Fraction of faces whose participant / non-participant label is correct."""
    if set(predicted) != set(truth):
        raise EvaluationError("face-id sets differ between prediction and truth")
    if not truth:
        raise EvaluationError("no faces to score")
    correct = sum(1 for fid in truth if predicted[fid] == truth[fid])
    return correct / len(truth)


def scene_target_iou(report, truth: GroundTruth,
                     scene: SceneInput) -> Optional[float]:
    """IOU of the predicted common target against the true target mask.

    None for negative scenes. When several events are predicted, the
    best-matching one is scored; predicting nothing on a positive scene
    scores 0.
    """
    if not truth.has_joint_attention:
        return None
    true_mask = frozenset(
        int(i) for rle in truth.target_masks.values() for i in rle_decode(rle))
    if not report.events:
        return 0.0
    best = 0.0
    for ev in report.events:
        pred = scene.segment_index_set(ev.segment_id)
        best = max(best, mask_iou(pred, true_mask))
    return best


def _truth_labels(truth: GroundTruth, face_ids) -> Dict[int, str]:
    participants = truth.participants
    return {fid: ("participant" if fid in participants else "non_participant")
            for fid in face_ids}


def evaluate_scene(scene: SceneInput, truth: GroundTruth,
                   config: DetectorConfig) -> SceneRow:
    report = analyze_scene(scene, config)
    face_ids = [f.face_id for f in scene.faces]
    predicted = classify_agents(face_ids, report.events)
    return SceneRow(
        scene_id=scene.scene_id,
        mode=config.mode.value,
        target_iou=scene_target_iou(report, truth, scene),
        agent_accuracy=agent_accuracy(predicted, _truth_labels(truth, face_ids)),
        n_faces=len(face_ids),
        predicted_ja=report.has_joint_attention,
        true_ja=truth.has_joint_attention,
    )


def evaluate_dataset(pairs: List[Tuple[SceneInput, GroundTruth]],
                     config: DetectorConfig) -> EvalSummary:
    """Scene-equal-weighted aggregation of the three metrics."""
    if not pairs:
        raise EvaluationError("empty dataset")
    rows = []
    for scene, truth in sorted(pairs, key=lambda p: p[0].scene_id):
        try:
            rows.append(evaluate_scene(scene, truth, config))
        except Exception as e:
            raise EvaluationError(f"scene {scene.scene_id}: {e}") from e
    positives = [r.target_iou for r in rows if r.target_iou is not None]
    return EvalSummary(
        n_scenes=len(rows),
        mean_target_iou=(sum(positives) / len(positives)) if positives else None,
        agent_accuracy=sum(r.agent_accuracy for r in rows) / len(rows),
        ja_classification_accuracy=sum(
            1 for r in rows if r.predicted_ja == r.true_ja) / len(rows),
        rows=rows,
    )


def run_ablation(pairs: List[Tuple[SceneInput, GroundTruth]],
                 config: DetectorConfig) -> AblationPair:
    return AblationPair(
        three_d=evaluate_dataset(pairs, replace(config, mode=Mode.THREE_D)),
        two_d=evaluate_dataset(pairs, replace(config, mode=Mode.TWO_D)),
    )


def summary_to_dict(summary: EvalSummary) -> dict:
    return {
        "n_scenes": summary.n_scenes,
        "mean_target_iou": summary.mean_target_iou,
        "agent_accuracy": summary.agent_accuracy,
        "ja_classification_accuracy": summary.ja_classification_accuracy,
    }


def summary_to_json(summary: EvalSummary) -> str:
    return json.dumps(summary_to_dict(summary), indent=2) + "\n"


def rows_to_table(rows: List[SceneRow]) -> str:
    """Flat tab-delimited per-scene table."""
    lines = ["scene_id\tmode\tiou\tagent_acc\tn_faces\tpredicted_ja\ttrue_ja"]
    for r in rows:
        iou = "n/a" if r.target_iou is None else f"{r.target_iou:.4f}"
        lines.append(f"{r.scene_id}\t{r.mode}\t{iou}\t{r.agent_accuracy:.4f}"
                     f"\t{r.n_faces}\t{int(r.predicted_ja)}\t{int(r.true_ja)}")
    return "\n".join(lines) + "\n"
