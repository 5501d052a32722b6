"""SVG overlay rendering: gaze rays, segment outlines, detected targets."""
from __future__ import annotations

import math
from typing import List, Tuple

from .events import SceneReport
from .geometry import gaze_projection_2d
from .scene import SceneInput


class OverlayError(ValueError):
    pass


def _mask_outline_path(scene: SceneInput, segment_id: int) -> str:
    """SVG path of all boundary edges of a segment mask (pixel grid edges)."""
    w = scene.camera.width
    idx = scene.segment_index_set(segment_id)
    parts: List[str] = []
    for i in sorted(idx):
        y, x = divmod(i, w)
        # each pixel covers [x-0.5, x+0.5] x [y-0.5, y+0.5]
        if (i - 1 not in idx) or x == 0:
            parts.append(f"M{x - 0.5},{y - 0.5}L{x - 0.5},{y + 0.5}")
        if (i + 1 not in idx) or x == w - 1:
            parts.append(f"M{x + 0.5},{y - 0.5}L{x + 0.5},{y + 0.5}")
        if i - w not in idx:
            parts.append(f"M{x - 0.5},{y - 0.5}L{x + 0.5},{y - 0.5}")
        if i + w not in idx:
            parts.append(f"M{x - 0.5},{y + 0.5}L{x + 0.5},{y + 0.5}")
    return "".join(parts)


def _ray_to_border(eye: Tuple[float, float], dir2: Tuple[float, float],
                   width: int, height: int) -> Tuple[float, float]:
    """Endpoint where the ray from the eye leaves the image rectangle."""
    best = math.inf
    for e, d, lo, hi in ((eye[0], dir2[0], 0.0, width - 1.0),
                         (eye[1], dir2[1], 0.0, height - 1.0)):
        if d > 1e-12:
            best = min(best, (hi - e) / d)
        elif d < -1e-12:
            best = min(best, (lo - e) / d)
    best = max(best, 0.0)
    return (eye[0] + best * dir2[0], eye[1] + best * dir2[1])


def render_overlay(scene: SceneInput, report: SceneReport) -> str:
    """Scalable-vector overlay: grey segment outlines, one red gaze ray per
    face (a dot for degenerate gaze), green outlines on detected common
    targets, and the captions."""
    if report.scene_id != scene.scene_id:
        raise OverlayError(
            f"report is for scene '{report.scene_id}', not '{scene.scene_id}'")
    w, h = scene.camera.width, scene.camera.height
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
           f'viewBox="0 0 {w} {h}">']
    out.append(f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>')

    event_segments = {ev.segment_id for ev in report.events}
    for seg in sorted(scene.segments, key=lambda s: s.segment_id):
        if seg.segment_id in event_segments:
            continue
        d = _mask_outline_path(scene, seg.segment_id)
        out.append(f'<path class="segment" d="{d}" fill="none" '
                   f'stroke="#999999" stroke-width="0.5"/>')

    for det in report.detections:
        face = next(f for f in scene.faces if f.face_id == det.face_id)
        ex, ey = face.eye_center_px
        dir2 = gaze_projection_2d(face.gaze)
        if dir2 is None:
            out.append(f'<circle class="gaze-degenerate" cx="{ex:.2f}" '
                       f'cy="{ey:.2f}" r="3" fill="red"/>')
        else:
            bx, by = _ray_to_border((ex, ey), dir2, w, h)
            out.append(f'<line class="gaze" x1="{ex:.2f}" y1="{ey:.2f}" '
                       f'x2="{bx:.2f}" y2="{by:.2f}" stroke="red" '
                       f'stroke-width="1.5"/>')

    for ev in sorted(report.events, key=lambda e: e.segment_id):
        d = _mask_outline_path(scene, ev.segment_id)
        out.append(f'<path class="target" d="{d}" fill="none" '
                   f'stroke="green" stroke-width="1.5"/>')

    for i, caption in enumerate(report.captions):
        out.append(f'<text class="caption" x="5" y="{15 + 15 * i}" '
                   f'font-size="12" fill="black">{caption}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
