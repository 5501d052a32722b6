"""Joint-attention events, agent labels, captions and the scene report."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .detect import DetectorConfig, TargetDetection, detect_target
from .scene import SceneInput

CAPTION_TEMPLATE = "{count} people are looking at {name}"
#: Predicted events on distinct segments whose masks overlap beyond this
#: IOU are flagged in the report for auditing.
OVERLAP_AUDIT_IOU = 0.5


@dataclass(frozen=True)
class JointAttentionEvent:
    segment_id: int
    participant_face_ids: frozenset

    def __post_init__(self):
        if len(self.participant_face_ids) < 2:
            raise ValueError("joint attention needs at least two participants")


@dataclass(frozen=True)
class SceneReport:
    scene_id: str
    detections: List[TargetDetection]
    events: List[JointAttentionEvent]
    captions: List[str]
    overlap_flags: List[str] = field(default_factory=list)

    @property
    def has_joint_attention(self) -> bool:
        return bool(self.events)


def resolve_events(detections: List[TargetDetection]) -> List[JointAttentionEvent]:
    """Group resolved targets by segment; every group of two or more faces
    becomes one event."""
    seen = set()
    by_segment: Dict[int, set] = {}
    for det in detections:
        if det.face_id in seen:
            raise ValueError(f"duplicate face id {det.face_id}")
        seen.add(det.face_id)
        if det.has_target:
            by_segment.setdefault(det.target.segment_id, set()).add(det.face_id)
    return [JointAttentionEvent(sid, frozenset(faces))
            for sid, faces in sorted(by_segment.items())
            if len(faces) >= 2]


def classify_agents(face_ids: List[int],
                    events: List[JointAttentionEvent]) -> Dict[int, str]:
    """'participant' for faces in some event, 'non_participant' otherwise."""
    participants = set()
    for ev in events:
        participants |= ev.participant_face_ids
    return {fid: ("participant" if fid in participants else "non_participant")
            for fid in face_ids}


def make_caption(event: JointAttentionEvent,
                 labels: Dict[int, Optional[str]]) -> str:
    name = labels.get(event.segment_id) or f"segment {event.segment_id}"
    return CAPTION_TEMPLATE.format(count=len(event.participant_face_ids),
                                   name=name)


def _masks_overlap_iou(scene: SceneInput, sid_a: int, sid_b: int) -> float:
    a = scene.segment_index_set(sid_a)
    b = scene.segment_index_set(sid_b)
    union = len(a | b)
    return len(a & b) / union if union else 1.0


def analyze_scene(scene: SceneInput, config: DetectorConfig) -> SceneReport:
    """Full per-scene pipeline: detect each face's target, aggregate events,
    caption them."""
    detections = [detect_target(scene, face, config)
                  for face in sorted(scene.faces, key=lambda f: f.face_id)]
    events = resolve_events(detections)
    labels = {s.segment_id: s.label for s in scene.segments}
    captions = [make_caption(ev, labels) for ev in events]
    flags = []
    for i, ev_a in enumerate(events):
        for ev_b in events[i + 1:]:
            iou = _masks_overlap_iou(scene, ev_a.segment_id, ev_b.segment_id)
            if iou > OVERLAP_AUDIT_IOU:
                flags.append(
                    f"events on segments {ev_a.segment_id} and {ev_b.segment_id}"
                    f" overlap (iou={iou:.2f})")
    return SceneReport(scene.scene_id, detections, events, captions, flags)


def report_to_dict(report: SceneReport) -> dict:
    faces = []
    for det in report.detections:
        entry = {"face_id": det.face_id}
        if det.has_target:
            entry["target_segment_id"] = det.target.segment_id
            entry["hit_px"] = list(det.target.hit_px)
            entry["pixel_distance"] = det.target.pixel_distance
            entry["ray_depth_m"] = det.target.ray_depth_m
            entry["region_depth_m"] = det.target.region_depth_m
        else:
            entry["no_target_reason"] = det.no_target_reason.value
        faces.append(entry)
    return {
        "scene_id": report.scene_id,
        "faces": faces,
        "events": [{"segment_id": ev.segment_id,
                    "face_ids": sorted(ev.participant_face_ids)}
                   for ev in report.events],
        "has_joint_attention": report.has_joint_attention,
        "captions": report.captions,
        "overlap_flags": report.overlap_flags,
    }


def report_to_json(report: SceneReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"
