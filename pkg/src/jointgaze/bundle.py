"""Scene bundle serialization.

On disk a bundle is a JSON manifest plus a binary depth raster:

  manifest: scene_id, camera{focal_px, ppx, ppy, width, height},
            faces[{face_id, eye_x, eye_y, ear_px, gx, gy, gz, bbox?}],
            segments[{segment_id, label?, rle:[[start,len],...]}],
            depth_file (relative path)
  depth:    b"DMAP" | uint32le width | uint32le height |
            width*height float32le, row-major, meters

The single-bytes form used by parse_scene/serialize_scene is the
manifest on one line followed by the depth blob; serialization is
canonical, so structurally equal scenes produce identical bytes.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import List, Tuple

import numpy as np

from .geometry import CameraModel, GazeVector
from .scene import (DepthMap, FaceObservation, SceneInput, SegmentProposal,
                    validate_scene)

DEPTH_MAGIC = b"DMAP"
DEFAULT_DEPTH_NAME = "depth.dmap"


class ParseError(ValueError):
    pass


def encode_depth(depth: DepthMap) -> bytes:
    header = DEPTH_MAGIC + struct.pack("<II", depth.width, depth.height)
    return header + depth.values.astype("<f4").tobytes()


def decode_depth(blob: bytes) -> DepthMap:
    if len(blob) < 12 or blob[:4] != DEPTH_MAGIC:
        raise ParseError("depth file: bad magic")
    width, height = struct.unpack("<II", blob[4:12])
    expected = 12 + 4 * width * height
    if len(blob) < expected:
        raise ParseError("depth raster short")
    if len(blob) > expected:
        raise ParseError("depth raster has trailing bytes")
    values = np.frombuffer(blob[12:], dtype="<f4").reshape(height, width)
    return DepthMap(width, height, values.copy())


def _manifest_dict(scene: SceneInput, depth_file: str) -> dict:
    faces = []
    for f in sorted(scene.faces, key=lambda f: f.face_id):
        entry = {
            "face_id": f.face_id,
            "eye_x": float(f.eye_center_px[0]),
            "eye_y": float(f.eye_center_px[1]),
            "ear_px": float(f.ear_to_ear_px),
            "gx": f.gaze.gx,
            "gy": f.gaze.gy,
            "gz": f.gaze.gz,
        }
        if f.face_bbox is not None:
            entry["bbox"] = list(f.face_bbox)
        faces.append(entry)
    segments = []
    for s in sorted(scene.segments, key=lambda s: s.segment_id):
        entry = {"segment_id": s.segment_id}
        if s.label is not None:
            entry["label"] = s.label
        entry["rle"] = [[int(a), int(b)] for a, b in sorted(s.rle)]
        segments.append(entry)
    return {
        "scene_id": scene.scene_id,
        "camera": {
            "focal_px": float(scene.camera.focal_px),
            "ppx": float(scene.camera.ppx),
            "ppy": float(scene.camera.ppy),
            "width": scene.camera.width,
            "height": scene.camera.height,
        },
        "faces": faces,
        "segments": segments,
        "depth_file": depth_file,
    }


def manifest_bytes(scene: SceneInput, depth_file: str = DEFAULT_DEPTH_NAME) -> bytes:
    return json.dumps(_manifest_dict(scene, depth_file),
                      separators=(",", ":")).encode("utf-8")


def _require(d: dict, key: str, ctx: str):
    if key not in d:
        raise ParseError(f"{ctx}: missing field '{key}'")
    return d[key]


def scene_from_manifest(manifest: dict, depth: DepthMap) -> SceneInput:
    cam_d = _require(manifest, "camera", "manifest")
    try:
        camera = CameraModel(
            focal_px=float(_require(cam_d, "focal_px", "camera")),
            ppx=float(_require(cam_d, "ppx", "camera")),
            ppy=float(_require(cam_d, "ppy", "camera")),
            width=int(_require(cam_d, "width", "camera")),
            height=int(_require(cam_d, "height", "camera")),
        )
    except ValueError as e:
        raise ParseError(f"camera: {e}") from e
    if depth.width != camera.width or depth.height != camera.height:
        raise ParseError("depth dimensions do not match camera")
    faces = []
    for fd in _require(manifest, "faces", "manifest"):
        ctx = f"face {fd.get('face_id', '?')}"
        try:
            gaze = GazeVector(float(_require(fd, "gx", ctx)),
                              float(_require(fd, "gy", ctx)),
                              float(_require(fd, "gz", ctx)))
        except ValueError as e:
            raise ParseError(f"{ctx}: {e}") from e
        bbox = tuple(fd["bbox"]) if "bbox" in fd else None
        faces.append(FaceObservation(
            face_id=int(_require(fd, "face_id", ctx)),
            eye_center_px=(float(_require(fd, "eye_x", ctx)),
                           float(_require(fd, "eye_y", ctx))),
            ear_to_ear_px=float(_require(fd, "ear_px", ctx)),
            gaze=gaze,
            face_bbox=bbox,
        ))
    segments = []
    for sd in _require(manifest, "segments", "manifest"):
        ctx = f"segment {sd.get('segment_id', '?')}"
        runs: List[Tuple[int, int]] = [
            (int(r[0]), int(r[1])) for r in _require(sd, "rle", ctx)]
        segments.append(SegmentProposal(
            segment_id=int(_require(sd, "segment_id", ctx)),
            rle=runs,
            label=sd.get("label"),
        ))
    scene = SceneInput(
        scene_id=str(_require(manifest, "scene_id", "manifest")),
        camera=camera, faces=faces, depth=depth, segments=segments)
    violations = validate_scene(scene)
    if violations:
        raise ParseError("; ".join(violations))
    return scene


def serialize_scene(scene: SceneInput) -> bytes:
    """Canonical single-blob form: one manifest line, then the depth blob."""
    return manifest_bytes(scene) + b"\n" + encode_depth(scene.depth)


def parse_scene(blob: bytes) -> SceneInput:
    nl = blob.find(b"\n")
    if nl < 0:
        raise ParseError("manifest: missing newline terminator")
    try:
        manifest = json.loads(blob[:nl].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError(f"manifest: malformed JSON ({e})") from e
    depth = decode_depth(blob[nl + 1:])
    return scene_from_manifest(manifest, depth)


def write_scene_bundle(scene: SceneInput, out_dir, stem: str = None) -> Path:
    """Write manifest + depth files; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = stem or scene.scene_id
    depth_name = f"{stem}.dmap"
    manifest_path = out_dir / f"{stem}.json"
    manifest_path.write_bytes(manifest_bytes(scene, depth_file=depth_name) + b"\n")
    (out_dir / depth_name).write_bytes(encode_depth(scene.depth))
    return manifest_path


def read_scene_bundle(manifest_path) -> SceneInput:
    manifest_path = Path(manifest_path)
    try:
        manifest = json.loads(manifest_path.read_text("utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"manifest: malformed JSON ({e})") from e
    depth_rel = _require(manifest, "depth_file", "manifest")
    depth_path = manifest_path.parent / depth_rel
    if not depth_path.exists():
        raise ParseError(f"depth file not found: {depth_rel}")
    depth = decode_depth(depth_path.read_bytes())
    return scene_from_manifest(manifest, depth)
