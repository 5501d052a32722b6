"""Per-face gaze target selection.

Candidates are the segments crossed by the projected gaze ray; the 3D
detector keeps the nearest one whose mean region depth matches the depth
predicted along the 3D gaze ray, while the 2D variant ignores depth
entirely and takes the nearest crossing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from .geometry import (FACE_WIDTH_M, GeometryError, gaze_projection_2d,
                       pixel_scale_at_face, ray_depth_at_pixel)
from .scene import FaceObservation, SceneInput, region_mean_depth, trace_ray_hits


class Mode(Enum):
    THREE_D = "3d"
    TWO_D = "2d"


class NoTargetReason(Enum):
    DEGENERATE_GAZE = "degenerate_gaze"
    NO_INTERSECTIONS = "no_intersections"
    NO_DEPTH_MATCH = "no_depth_match"


@dataclass(frozen=True)
class DetectorConfig:
    depth_tolerance_m: float = 0.3
    mode: Mode = Mode.THREE_D
    face_width_m: float = FACE_WIDTH_M

    def __post_init__(self):
        if self.depth_tolerance_m <= 0:
            raise ValueError("depth_tolerance_m must be positive")
        if self.face_width_m <= 0:
            raise ValueError("face_width_m must be positive")


@dataclass(frozen=True)
class Candidate:
    segment_id: int
    hit_px: Tuple[int, int]
    pixel_distance: float
    ray_depth_m: float
    region_depth_m: float

    @property
    def depth_residual_m(self) -> float:
        return abs(self.region_depth_m - self.ray_depth_m)


@dataclass(frozen=True)
class TargetDetection:
    face_id: int
    target: Optional[Candidate] = None
    no_target_reason: Optional[NoTargetReason] = None
    candidates: List[Candidate] = field(default_factory=list)

    @property
    def has_target(self) -> bool:
        return self.target is not None


def face_depth_m(scene: SceneInput, face: FaceObservation) -> float:
    """Depth of the face plane: the depth-map value at the eye center.

    Falls back to the mean over the face bbox when the point read is not
    finite and positive.
    """
    d = scene.depth.at(*face.eye_center_px)
    if math.isfinite(d) and d > 0:
        return d
    if face.face_bbox is not None:
        x0, y0, x1, y1 = face.face_bbox
        patch = scene.depth.values[max(y0, 0):y1 + 1, max(x0, 0):x1 + 1]
        good = patch[np.isfinite(patch) & (patch > 0)]
        if good.size:
            return float(np.mean(good, dtype=np.float64))
    raise GeometryError(f"face {face.face_id}: no usable depth at eye center")


def enumerate_candidates(scene: SceneInput, face: FaceObservation,
                         config: DetectorConfig) -> List[Candidate]:
    """Ray-crossing segments annotated with ray and region depth.

    Empty when the gaze projection is degenerate. Candidates whose
    predicted ray depth is non-positive (gaze running back through the
    camera plane before the hit) are dropped.
    """
    dir2 = gaze_projection_2d(face.gaze)
    if dir2 is None:
        return []
    hits = trace_ray_hits(scene, face.eye_center_px, dir2)
    if not hits:
        return []
    scale = pixel_scale_at_face(face.ear_to_ear_px, config.face_width_m)
    z0 = face_depth_m(scene, face)
    segments = {s.segment_id: s for s in scene.segments}
    out = []
    for hit in hits:
        ray_depth = ray_depth_at_pixel(face.eye_center_px, z0, face.gaze,
                                       scale, hit.hit_px)
        if ray_depth <= 0:
            continue
        region_depth = region_mean_depth(scene.depth, segments[hit.segment_id])
        out.append(Candidate(
            segment_id=hit.segment_id,
            hit_px=hit.hit_px,
            pixel_distance=hit.pixel_distance,
            ray_depth_m=ray_depth,
            region_depth_m=region_depth,
        ))
    return out


def _detect(scene: SceneInput, face: FaceObservation,
            config: DetectorConfig) -> TargetDetection:
    if gaze_projection_2d(face.gaze) is None:
        return TargetDetection(face.face_id,
                               no_target_reason=NoTargetReason.DEGENERATE_GAZE)
    cands = enumerate_candidates(scene, face, config)
    if not cands:
        return TargetDetection(face.face_id,
                               no_target_reason=NoTargetReason.NO_INTERSECTIONS)
    if config.mode is Mode.THREE_D:
        matching = [c for c in cands
                    if c.depth_residual_m <= config.depth_tolerance_m]
        if not matching:
            return TargetDetection(
                face.face_id, no_target_reason=NoTargetReason.NO_DEPTH_MATCH,
                candidates=cands)
        pick = min(matching, key=lambda c: (c.pixel_distance,
                                            c.depth_residual_m, c.segment_id))
    else:
        pick = min(cands, key=lambda c: (c.pixel_distance,
                                         c.depth_residual_m, c.segment_id))
    return TargetDetection(face.face_id, target=pick, candidates=cands)


def detect_target_3d(scene: SceneInput, face: FaceObservation,
                     config: DetectorConfig) -> TargetDetection:
    if config.mode is not Mode.THREE_D:
        raise ValueError("detect_target_3d requires mode=THREE_D")
    return _detect(scene, face, config)


def detect_target_2d(scene: SceneInput, face: FaceObservation,
                     config: DetectorConfig) -> TargetDetection:
    if config.mode is not Mode.TWO_D:
        raise ValueError("detect_target_2d requires mode=TWO_D")
    return _detect(scene, face, config)


def detect_target(scene: SceneInput, face: FaceObservation,
                  config: DetectorConfig) -> TargetDetection:
    return _detect(scene, face, config)
