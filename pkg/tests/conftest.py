import math

import numpy as np
import pytest

from jointgaze.geometry import CameraModel, GazeVector
from jointgaze.scene import (DepthMap, FaceObservation, SceneInput,
                             SegmentProposal, rle_encode)


def random_gaze(rng) -> GazeVector:
    v = rng.normal(size=3)
    while np.linalg.norm(v) < 1e-3:
        v = rng.normal(size=3)
    return GazeVector.from_components(*v)


def random_scene(rng, n_segments=None, width=None, height=None) -> SceneInput:
    """Small random scene: rectangle-plus-speckle segments, random faces."""
    width = width or int(rng.integers(24, 80))
    height = height or int(rng.integers(24, 80))
    cam = CameraModel(float(rng.uniform(40, 300)),
                      float(rng.uniform(0, width - 1)),
                      float(rng.uniform(0, height - 1)), width, height)
    depth = DepthMap(width, height,
                     rng.uniform(0.5, 5.0, size=(height, width)).astype(np.float32))
    n_segments = n_segments if n_segments is not None else int(rng.integers(1, 6))
    segments = []
    for sid in range(1, n_segments + 1):
        mask = np.zeros((height, width), dtype=bool)
        x0 = int(rng.integers(0, width - 2))
        y0 = int(rng.integers(0, height - 2))
        x1 = int(rng.integers(x0 + 1, min(x0 + 15, width)))
        y1 = int(rng.integers(y0 + 1, min(y0 + 15, height)))
        mask[y0:y1, x0:x1] = True
        for _ in range(int(rng.integers(0, 8))):
            mask[rng.integers(0, height), rng.integers(0, width)] = True
        label = None if rng.random() < 0.5 else f"thing{sid}"
        segments.append(SegmentProposal(
            sid, rle_encode(np.flatnonzero(mask.reshape(-1))), label=label))
    faces = []
    for fid in range(1, int(rng.integers(1, 4)) + 1):
        bbox = None
        if rng.random() < 0.5:
            bx = int(rng.integers(0, width - 4))
            by = int(rng.integers(0, height - 4))
            bbox = (bx, by, bx + 3, by + 3)
        faces.append(FaceObservation(
            face_id=fid,
            eye_center_px=(float(rng.uniform(0, width - 1)),
                           float(rng.uniform(0, height - 1))),
            ear_to_ear_px=float(rng.uniform(5, 60)),
            gaze=random_gaze(rng),
            face_bbox=bbox))
    return SceneInput(scene_id=f"rand_{rng.integers(0, 10**9)}", camera=cam,
                      faces=faces, depth=depth, segments=segments)


def corridor_oracle(scene, eye_px, dir2, half_width=0.75):
    """Exhaustive per-pixel scan: for every segment, the mask pixel with
    minimal forward projection within the corridor around the ray line."""
    w = scene.camera.width
    ex, ey = eye_px
    dx, dy = dir2
    eye_idx = (min(max(int(round(ey)), 0), scene.camera.height - 1) * w
               + min(max(int(round(ex)), 0), w - 1))
    out = {}
    for seg in scene.segments:
        indices = scene.segment_index_set(seg.segment_id)
        if eye_idx in indices:
            continue
        best = None
        for idx in sorted(indices):
            y, x = divmod(idx, w)
            t = (x - ex) * dx + (y - ey) * dy
            if t <= 0:
                continue
            if abs((x - ex) * dy - (y - ey) * dx) > half_width:
                continue
            if best is None or t < best[0]:
                best = (t, (x, y))
        if best is not None:
            out[seg.segment_id] = best
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def unit2(angle):
    return (math.cos(angle), math.sin(angle))
