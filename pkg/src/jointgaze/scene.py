"""Scene data model, mask utilities and the grid ray trace.

A scene is the fused perception input for one image: camera intrinsics,
per-face eye centers and 3D gaze vectors, a metric depth raster, and a
shared set of segment proposals encoded as run-length masks over
row-major pixel indices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .geometry import CameraModel, GazeVector

#: Half-width in pixels of the corridor around the continuous ray line
#: within which a mask pixel counts as intersected.
CORRIDOR_HALF_WIDTH_PX = 0.75


class SceneError(ValueError):
    pass


def rle_encode(indices: np.ndarray) -> List[Tuple[int, int]]:
    """Encode sorted row-major pixel indices as [(start, length), ...] runs."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) != 1)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [idx.size - 1]))
    return [(int(idx[s]), int(idx[e] - idx[s] + 1)) for s, e in zip(starts, ends)]


def rle_decode(runs: List[Tuple[int, int]]) -> np.ndarray:
    """Expand runs back to the sorted array of pixel indices."""
    if not runs:
        return np.empty(0, dtype=np.int64)
    return np.concatenate([np.arange(s, s + n, dtype=np.int64) for s, n in runs])


def validate_rle(runs: List[Tuple[int, int]], n_pixels: int) -> Optional[str]:
    """Return a violation message for malformed runs, or None if valid."""
    if not runs:
        return "mask empty"
    prev_end = -1
    for start, length in runs:
        if length <= 0:
            return f"run at {start} has non-positive length"
        if start <= prev_end:
            return f"run at {start} overlaps or is unsorted"
        prev_end = start + length - 1
    if prev_end >= n_pixels:
        return f"run index {prev_end} out of raster range {n_pixels}"
    if runs[0][0] < 0:
        return "negative run start"
    return None


@dataclass(frozen=True)
class FaceObservation:
    face_id: int
    eye_center_px: Tuple[float, float]
    ear_to_ear_px: float
    gaze: GazeVector
    face_bbox: Optional[Tuple[int, int, int, int]] = None  # x0, y0, x1, y1


@dataclass(frozen=True)
class DepthMap:
    width: int
    height: int
    values: np.ndarray  # float32, shape (height, width), meters

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float32).reshape(self.height, self.width)
        object.__setattr__(self, "values", v)

    def at(self, x: float, y: float) -> float:
        """Depth at the pixel nearest to (x, y)."""
        xi = min(max(int(round(x)), 0), self.width - 1)
        yi = min(max(int(round(y)), 0), self.height - 1)
        return float(self.values[yi, xi])


@dataclass(frozen=True)
class SegmentProposal:
    segment_id: int
    rle: List[Tuple[int, int]]
    label: Optional[str] = None

    def pixel_indices(self) -> np.ndarray:
        return rle_decode(self.rle)

    def mask(self, width: int, height: int) -> np.ndarray:
        m = np.zeros(width * height, dtype=bool)
        m[self.pixel_indices()] = True
        return m.reshape(height, width)

    def contains(self, x: int, y: int, width: int) -> bool:
        idx = y * width + x
        for start, length in self.rle:
            if start <= idx < start + length:
                return True
        return False


@dataclass(frozen=True)
class RayHit:
    segment_id: int
    hit_px: Tuple[int, int]
    pixel_distance: float


@dataclass(frozen=True)
class SceneInput:
    scene_id: str
    camera: CameraModel
    faces: List[FaceObservation]
    depth: DepthMap
    segments: List[SegmentProposal]
    _index_sets: dict = field(default_factory=dict, compare=False, repr=False)

    def segment_index_set(self, segment_id: int) -> frozenset:
        """Cached pixel-index set for one segment."""
        cached = self._index_sets.get(segment_id)
        if cached is None:
            seg = next(s for s in self.segments if s.segment_id == segment_id)
            cached = frozenset(int(i) for i in seg.pixel_indices())
            self._index_sets[segment_id] = cached
        return cached


def region_mean_depth(depth: DepthMap, segment: SegmentProposal) -> float:
    """Arithmetic mean depth over the segment's mask pixels."""
    idx = segment.pixel_indices()
    if idx.size == 0:
        raise SceneError(f"segment {segment.segment_id}: mask empty")
    flat = depth.values.reshape(-1)
    if idx.max() >= flat.size:
        raise SceneError(f"segment {segment.segment_id}: mask index out of range")
    return float(np.mean(flat[idx], dtype=np.float64))


def trace_ray_hits(scene: SceneInput, eye_px: Tuple[float, float],
                   dir2: Tuple[float, float]) -> List[RayHit]:
    """First mask pixel of each segment along a 2D ray from the eye.

    Walks the raster one dominant-axis unit per step and, at each step,
    tests the few pixels whose center lies within the 0.75 px corridor
    around the continuous line. For each segment the corridor pixel with
    the smallest forward projection is kept. Segments whose mask contains
    the eye pixel are excluded. Output sorted by pixel distance.
    """
    dx, dy = dir2
    n = math.hypot(dx, dy)
    if not (abs(n - 1.0) < 1e-6):
        raise SceneError("ray direction must be unit length")
    w, h = scene.camera.width, scene.camera.height
    ex, ey = eye_px
    if not (0 <= ex < w and 0 <= ey < h):
        raise SceneError("eye center outside image bounds")

    eye_xi = min(max(int(round(ex)), 0), w - 1)
    eye_yi = min(max(int(round(ey)), 0), h - 1)
    eye_idx = eye_yi * w + eye_xi
    excluded = {s.segment_id for s in scene.segments
                if eye_idx in scene.segment_index_set(s.segment_id)}
    candidates = [s for s in scene.segments if s.segment_id not in excluded]
    if not candidates:
        return []
    index_sets = {s.segment_id: scene.segment_index_set(s.segment_id)
                  for s in candidates}

    # best per segment: (forward projection t, hit pixel)
    best: dict = {}
    x_dominant = abs(dx) >= abs(dy)
    step = 1.0 / abs(dx) if x_dominant else 1.0 / abs(dy)
    k = 0
    while True:
        px = ex + k * step * dx
        py = ey + k * step * dy
        if px < -2 or px > w + 1 or py < -2 or py > h + 1:
            break
        # pixels near the line at this step; corridor is narrower than the
        # +-2 window, the exact perpendicular test below filters the rest
        if x_dominant:
            xi_list = [int(round(px))]
            yi_list = range(int(math.floor(py)) - 1, int(math.ceil(py)) + 2)
            cells = [(xi, yi) for xi in xi_list for yi in yi_list]
        else:
            yi_list = [int(round(py))]
            xi_list = range(int(math.floor(px)) - 1, int(math.ceil(px)) + 2)
            cells = [(xi, yi) for xi in xi_list for yi in yi_list]
        for xi, yi in cells:
            if not (0 <= xi < w and 0 <= yi < h):
                continue
            ox, oy = xi - ex, yi - ey
            t = ox * dx + oy * dy
            if t <= 0:
                continue
            perp = abs(ox * dy - oy * dx)
            if perp > CORRIDOR_HALF_WIDTH_PX:
                continue
            idx = yi * w + xi
            for sid, index_set in index_sets.items():
                if idx in index_set:
                    cur = best.get(sid)
                    if cur is None or t < cur[0]:
                        best[sid] = (t, (xi, yi))
        k += 1

    hits = [RayHit(sid, hit, math.hypot(hit[0] - ex, hit[1] - ey))
            for sid, (t, hit) in best.items()]
    hits.sort(key=lambda rh: (rh.pixel_distance, rh.segment_id))
    return hits


def validate_scene(scene: SceneInput) -> List[str]:
    """All invariant violations of a scene, empty when valid."""
    out: List[str] = []
    cam = scene.camera
    if scene.depth.width != cam.width or scene.depth.height != cam.height:
        out.append("depth: dimensions do not match camera")
    vals = scene.depth.values
    if not np.all(np.isfinite(vals)):
        out.append("depth: non-finite value")
    elif np.any(vals <= 0):
        out.append("depth: non-positive value")
    if not scene.faces:
        out.append("faces: scene has no faces")
    seen_faces = set()
    for f in scene.faces:
        if f.face_id in seen_faces:
            out.append(f"face {f.face_id}: duplicate face id")
        seen_faces.add(f.face_id)
        x, y = f.eye_center_px
        if not (0 <= x < cam.width and 0 <= y < cam.height):
            out.append(f"face {f.face_id}: eye center outside image bounds")
        if f.ear_to_ear_px <= 0:
            out.append(f"face {f.face_id}: non-positive ear-to-ear distance")
    seen_segs = set()
    n_pixels = cam.width * cam.height
    for s in scene.segments:
        if s.segment_id in seen_segs:
            out.append(f"segment {s.segment_id}: duplicate segment id")
        seen_segs.add(s.segment_id)
        msg = validate_rle(s.rle, n_pixels)
        if msg is not None:
            out.append(f"segment {s.segment_id}: {msg}")
    return out
