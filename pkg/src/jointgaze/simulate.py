"""Synthetic billboard-world generator and renderer.

Worlds are collections of fronto-parallel rectangles (billboards) at
constant depth: target objects plus one head billboard per agent. A
z-buffer render produces the exact depth raster and visible-pixel
segment masks, so every scene comes with unambiguous ground truth for
per-agent targets and joint-attention events.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import ndimage

from .geometry import (FACE_WIDTH_M, CameraModel, GazeVector,
                       project_world_point)
from .scene import (DepthMap, FaceObservation, SceneInput, SegmentProposal,
                    rle_encode)

FACE_HEIGHT_M = 0.20
#: Gaze dominant-axis component below which placements are resampled;
#: keeps the X/Z (or Y/Z) depth ratio well conditioned.
MIN_DOMINANT_AXIS = 0.15
#: Residual margin (meters) used when validating that no off-target
#: billboard on an agent's ray could pass the depth match.
MIN_CLEAR_RESIDUAL_M = 0.9
MAX_SAMPLE_TRIES = 1000


class RenderRejection(RuntimeError):
    """World layout produced an ambiguous or occluded scene; resample."""


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class WorldObject:
    object_id: int
    label: str
    center: Tuple[float, float, float]
    width_m: float
    height_m: float


@dataclass(frozen=True)
class WorldAgent:
    agent_id: int
    head_center: Tuple[float, float, float]
    target_object_id: Optional[int] = None
    free_gaze: Optional[GazeVector] = None


@dataclass(frozen=True)
class WorldSpec:
    camera: CameraModel
    agents: List[WorldAgent]
    objects: List[WorldObject]
    background_depth_m: float
    face_width_m: float = FACE_WIDTH_M
    face_height_m: float = FACE_HEIGHT_M


@dataclass(frozen=True)
class GroundTruth:
    target_by_agent: Dict[int, Optional[int]]
    events: List[Tuple[int, frozenset]]  # (segment_id, agent ids)
    target_masks: Dict[int, List[Tuple[int, int]]]  # segment_id -> rle

    @property
    def participants(self) -> frozenset:
        out = set()
        for _, agents in self.events:
            out |= agents
        return frozenset(out)

    @property
    def has_joint_attention(self) -> bool:
        return bool(self.events)


@dataclass(frozen=True)
class NoiseSpec:
    gaze_sigma_deg: float = 0.0
    depth_sigma_m: float = 0.0
    mask_jitter_px: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.gaze_sigma_deg < 0 or self.depth_sigma_m < 0 or self.mask_jitter_px < 0:
            raise ValueError("noise magnitudes must be non-negative")

    @property
    def is_identity(self) -> bool:
        return (self.gaze_sigma_deg == 0 and self.depth_sigma_m == 0
                and self.mask_jitter_px == 0)


@dataclass(frozen=True)
class SimParams:
    n_agents: int = 2
    n_objects: int = 3
    p_joint: float = 0.5
    width: int = 640
    height: int = 480
    focal_px: float = 500.0

    def __post_init__(self):
        if self.n_agents < 2:
            raise ValueError("need at least two agents")
        if self.n_objects < 1:
            raise ValueError("need at least one object")
        if not (0.0 <= self.p_joint <= 1.0):
            raise ValueError("p_joint must be in [0, 1]")

    def make_camera(self) -> CameraModel:
        return CameraModel(self.focal_px, self.width / 2.0, self.height / 2.0,
                           self.width, self.height)


# ---------------------------------------------------------------------------
# billboard geometry helpers

def _billboards(world: WorldSpec):
    """All billboards as (segment_id, label, center, w, h, owner_agent)."""
    out = []
    for o in world.objects:
        out.append((o.object_id, o.label, o.center, o.width_m, o.height_m, None))
    base = 1 + max((o.object_id for o in world.objects), default=0)
    for a in world.agents:
        out.append((base + a.agent_id, f"face {a.agent_id}", a.head_center,
                    world.face_width_m, world.face_height_m, a.agent_id))
    return out


def face_segment_id(world: WorldSpec, agent_id: int) -> int:
    return 1 + max((o.object_id for o in world.objects), default=0) + agent_id


def _pixel_rect(cam: CameraModel, center, w_m, h_m):
    """Projected pixel-space rectangle (u0, u1, v0, v1) of a billboard."""
    cx, cy, z = center
    u0 = cam.ppx + cam.focal_px * (cx - w_m / 2) / z
    u1 = cam.ppx + cam.focal_px * (cx + w_m / 2) / z
    v0 = cam.ppy + cam.focal_px * (cy - h_m / 2) / z
    v1 = cam.ppy + cam.focal_px * (cy + h_m / 2) / z
    return u0, u1, v0, v1


def _agent_gaze(world: WorldSpec, agent: WorldAgent) -> GazeVector:
    if agent.free_gaze is not None:
        return agent.free_gaze
    target = next(o for o in world.objects
                  if o.object_id == agent.target_object_id)
    hx, hy, hz = agent.head_center
    tx, ty, tz = target.center
    return GazeVector.from_components(tx - hx, ty - hy, tz - hz)


# ---------------------------------------------------------------------------
# rendering

def render_world(world: WorldSpec, scene_id: str = "scene") -> Tuple[SceneInput, GroundTruth]:
    """Z-buffer render of the billboard world into a scene plus its truth.

    Raises RenderRejection when an agent's line of sight to its target is
    blocked by a nearer billboard, or when a billboard ends up with no
    visible pixels.
    """
    cam = world.camera
    boards = _billboards(world)
    depth = np.full((cam.height, cam.width), world.background_depth_m,
                    dtype=np.float32)
    owner = np.full((cam.height, cam.width), -1, dtype=np.int64)

    for sid, _, center, w_m, h_m, _ in sorted(boards, key=lambda b: -b[2][2]):
        u0, u1, v0, v1 = _pixel_rect(cam, center, w_m, h_m)
        if u0 < 0 or u1 > cam.width - 1 or v0 < 0 or v1 > cam.height - 1:
            raise RenderRejection(f"billboard {sid} projects outside the image")
        if center[2] >= world.background_depth_m:
            raise RenderRejection(f"billboard {sid} behind the background")
        xi0, xi1 = int(math.ceil(u0)), int(math.floor(u1))
        yi0, yi1 = int(math.ceil(v0)), int(math.floor(v1))
        depth[yi0:yi1 + 1, xi0:xi1 + 1] = center[2]
        owner[yi0:yi1 + 1, xi0:xi1 + 1] = sid

    _check_line_of_sight(world)

    segments = []
    flat_owner = owner.reshape(-1)
    for sid, label, _, _, _, _ in sorted(boards, key=lambda b: b[0]):
        idx = np.flatnonzero(flat_owner == sid)
        if idx.size == 0:
            raise RenderRejection(f"billboard {sid} fully occluded")
        segments.append(SegmentProposal(sid, rle_encode(idx), label=label))

    faces = []
    for a in sorted(world.agents, key=lambda a: a.agent_id):
        hz = a.head_center[2]
        eye = project_world_point(cam, a.head_center)
        faces.append(FaceObservation(
            face_id=a.agent_id,
            eye_center_px=eye,
            ear_to_ear_px=cam.focal_px * world.face_width_m / hz,
            gaze=_agent_gaze(world, a),
        ))

    scene = SceneInput(scene_id=scene_id, camera=cam, faces=faces,
                       depth=DepthMap(cam.width, cam.height, depth),
                       segments=segments)

    targets = {a.agent_id: a.target_object_id for a in world.agents}
    by_target: Dict[int, set] = {}
    for aid, tid in targets.items():
        if tid is not None:
            by_target.setdefault(tid, set()).add(aid)
    events = [(tid, frozenset(aids)) for tid, aids in sorted(by_target.items())
              if len(aids) >= 2]
    seg_by_id = {s.segment_id: s for s in segments}
    masks = {tid: seg_by_id[tid].rle for tid, _ in events}
    return scene, GroundTruth(targets, events, masks)


def _check_line_of_sight(world: WorldSpec, margin_m: float = 0.02):
    boards = _billboards(world)
    for a in world.agents:
        if a.target_object_id is None:
            continue
        target = next(o for o in world.objects
                      if o.object_id == a.target_object_id)
        hx, hy, hz = a.head_center
        tx, ty, tz = target.center
        if tz == hz:
            continue
        for sid, _, (bx, by, bz), w_m, h_m, owner_agent in boards:
            if sid == target.object_id or owner_agent == a.agent_id:
                continue
            lo, hi = sorted((hz, tz))
            if not (lo < bz < hi):
                continue
            s = (bz - hz) / (tz - hz)
            px = hx + s * (tx - hx)
            py = hy + s * (ty - hy)
            if (abs(px - bx) <= w_m / 2 + margin_m
                    and abs(py - by) <= h_m / 2 + margin_m):
                raise RenderRejection(
                    f"agent {a.agent_id}: line of sight blocked by billboard {sid}")


# ---------------------------------------------------------------------------
# placement validity (pure continuous geometry, no raster involved)

def _ray_rect_interval(eye, d, rect, pad_px):
    """Slab intersection of ray eye + s*d with a padded pixel rect.

    Returns (s_enter, s_exit) or None when the forward ray misses.
    """
    u0, u1, v0, v1 = rect
    lo, hi = 0.0, math.inf
    for e, dd, a0, a1 in ((eye[0], d[0], u0 - pad_px, u1 + pad_px),
                          (eye[1], d[1], v0 - pad_px, v1 + pad_px)):
        if abs(dd) < 1e-12:
            if not (a0 <= e <= a1):
                return None
            continue
        s0, s1 = (a0 - e) / dd, (a1 - e) / dd
        if s0 > s1:
            s0, s1 = s1, s0
        lo, hi = max(lo, s0), min(hi, s1)
        if lo > hi:
            return None
    return (lo, hi)


def _ray_depth_exact(world: WorldSpec, agent: WorldAgent, g: GazeVector,
                     eye, point):
    """Depth along the gaze ray at an image point, by similar triangles
    with the exact per-pixel scale of the head plane."""
    hz = agent.head_center[2]
    mpp = hz / world.camera.focal_px
    if abs(g.gx) >= abs(g.gy):
        return hz + (point[0] - eye[0]) * mpp * (g.gz / g.gx)
    return hz + (point[1] - eye[1]) * mpp * (g.gz / g.gy)


def detection_ray(world: WorldSpec, agent: WorldAgent):
    """The image-plane ray the detector will actually trace: eye position
    and the normalized (gx, gy) projection of the 3D gaze.

    This is not the perspective image of the 3D line of sight; the two
    diverge for heads away from the optical axis, which is exactly why
    off-axis layouts must be rejected for the oracle to close.
    """
    g = _agent_gaze(world, agent)
    eye = project_world_point(world.camera, agent.head_center)
    n = math.hypot(g.gx, g.gy)
    if n < 1e-3:
        return eye, None, g
    return eye, (g.gx / n, g.gy / n), g


def agent_ray_clear(world: WorldSpec, agent: WorldAgent,
                    allow_distractors: bool = False,
                    pad_px: float = 2.0) -> bool:
    """Whether an agent's traced gaze ray gives an unambiguous detection.

    The detection ray must enter the target rectangle with a small depth
    residual, and every other billboard the ray crosses earlier must
    either be absent (strict mode) or sit at a clearly non-matching
    depth (ambiguity-suite mode).
    """
    if agent.target_object_id is None:
        return True
    cam = world.camera
    target = next(o for o in world.objects
                  if o.object_id == agent.target_object_id)
    eye, d, g = detection_ray(world, agent)
    if d is None or max(abs(g.gx), abs(g.gy)) < MIN_DOMINANT_AXIS:
        return False

    t_rect = _pixel_rect(cam, target.center, target.width_m, target.height_m)
    span_t = _ray_rect_interval(eye, d, t_rect, 0.0)
    if span_t is None or span_t[0] < 4.0:
        return False
    s_target = span_t[0]
    entry = (eye[0] + s_target * d[0], eye[1] + s_target * d[1])
    if not (2 <= entry[0] <= cam.width - 3 and 2 <= entry[1] <= cam.height - 3):
        return False
    residual = abs(target.center[2]
                   - _ray_depth_exact(world, agent, g, eye, entry))
    if residual > 0.15:
        return False

    for sid, _, center, w_m, h_m, owner_agent in _billboards(world):
        if sid == target.object_id or owner_agent == agent.agent_id:
            continue
        rect = _pixel_rect(cam, center, w_m, h_m)
        span = _ray_rect_interval(eye, d, rect, pad_px)
        if span is None or span[0] > s_target + pad_px:
            continue
        if not allow_distractors:
            return False
        exit_s = min(span[1], s_target)
        r_in = abs(center[2] - _ray_depth_exact(
            world, agent, g, eye,
            (eye[0] + span[0] * d[0], eye[1] + span[0] * d[1])))
        r_out = abs(center[2] - _ray_depth_exact(
            world, agent, g, eye,
            (eye[0] + exit_s * d[0], eye[1] + exit_s * d[1])))
        if min(r_in, r_out) < MIN_CLEAR_RESIDUAL_M:
            return False
    return True


# ---------------------------------------------------------------------------
# world sampling

def _sample_point_in_view(rng, cam: CameraModel, z: float, w_m: float,
                          h_m: float, margin_px: float = 6.0):
    """Uniform billboard center whose projection stays inside the image."""
    half_u = cam.focal_px * w_m / (2 * z)
    half_v = cam.focal_px * h_m / (2 * z)
    u = rng.uniform(margin_px + half_u, cam.width - 1 - margin_px - half_u)
    v = rng.uniform(margin_px + half_v, cam.height - 1 - margin_px - half_v)
    return ((u - cam.ppx) * z / cam.focal_px,
            (v - cam.ppy) * z / cam.focal_px, z)


_OBJECT_NAMES = ["cake", "ball", "screen", "book", "lamp", "plant", "clock",
                 "mug", "poster", "radio"]


class _AttemptFailed(Exception):
    pass


def _attempt_world(rng, params: SimParams, joint: bool) -> WorldSpec:
    """One placement attempt: sample geometry, then pick a target
    assignment for which every agent's detection ray is clear."""
    cam = params.make_camera()
    objects = []
    for i in range(params.n_objects):
        z = rng.uniform(2.6, 4.4)
        w_m = rng.uniform(0.25, 0.6)
        h_m = rng.uniform(0.25, 0.6)
        # central bias: the orthographic gaze projection the detector uses
        # is only depth-consistent for targets near the optical axis
        objects.append(WorldObject(
            object_id=i + 1,
            label=_OBJECT_NAMES[i % len(_OBJECT_NAMES)],
            center=_sample_point_in_view(rng, cam, z, w_m, h_m,
                                         margin_px=0.22 * min(cam.width,
                                                              cam.height)),
            width_m=w_m, height_m=h_m))

    agents = []
    for i in range(params.n_agents):
        z = rng.uniform(1.6, 2.3)
        agents.append(WorldAgent(
            agent_id=i + 1,
            head_center=_sample_point_in_view(rng, cam, z, FACE_WIDTH_M,
                                              FACE_HEIGHT_M, margin_px=20.0)))
    base = WorldSpec(camera=cam, agents=agents, objects=objects,
                     background_depth_m=6.0)

    clear = {
        a.agent_id: {o.object_id for o in objects
                     if agent_ray_clear(base, replace(a, target_object_id=o.object_id))}
        for a in agents}
    assignment = _choose_assignment(rng, params, joint, clear)

    return replace(base, agents=[replace(a, target_object_id=assignment[a.agent_id])
                                 for a in agents])


def _choose_assignment(rng, params: SimParams, joint: bool, clear) -> dict:
    agent_ids = sorted(clear)
    if joint:
        n_shared = int(rng.integers(2, params.n_agents + 1))
        object_ids = list(range(1, params.n_objects + 1))
        rng.shuffle(object_ids)
        for shared in object_ids:
            able = [a for a in agent_ids if shared in clear[a]]
            if len(able) < n_shared:
                continue
            rng.shuffle(able)
            chosen = set(able[:n_shared])
            assignment = {a: shared for a in chosen}
            rest = _distinct_assignment(
                rng, [a for a in agent_ids if a not in chosen],
                {a: clear[a] - {shared} for a in agent_ids})
            if rest is None:
                continue
            assignment.update(rest)
            return assignment
        raise _AttemptFailed("no clear shared target")
    if params.n_objects < params.n_agents:
        raise GenerationError(
            "negative scenes need n_objects >= n_agents for distinct targets")
    assignment = _distinct_assignment(rng, agent_ids, clear)
    if assignment is None:
        raise _AttemptFailed("no distinct-target assignment")
    return assignment


def _distinct_assignment(rng, agent_ids, clear):
    """Greedy randomized matching of agents to pairwise-distinct targets."""
    order = list(agent_ids)
    rng.shuffle(order)
    used = set()
    out = {}
    for a in sorted(order, key=lambda a: len(clear[a] - used)):
        options = sorted(clear[a] - used)
        if not options:
            return None
        pick = options[int(rng.integers(0, len(options)))]
        out[a] = pick
        used.add(pick)
    return out


def _eyes_visible(scene: SceneInput, world: WorldSpec) -> bool:
    """Each agent's eye pixel must read its own head depth, or face-depth
    extraction would be corrupted by an occluder."""
    for a in world.agents:
        eye = project_world_point(world.camera, a.head_center)
        if abs(scene.depth.at(*eye) - a.head_center[2]) > 1e-4:
            return False
    return True


def sample_world(seed: int, params: SimParams = SimParams()) -> WorldSpec:
    """Rejection-sample a world whose every agent detection is unambiguous."""
    rng = np.random.default_rng(seed)
    joint = bool(rng.random() < params.p_joint)
    for _ in range(MAX_SAMPLE_TRIES):
        try:
            world = _attempt_world(rng, params, joint)
        except _AttemptFailed:
            continue
        if not all(agent_ray_clear(world, a) for a in world.agents):
            continue
        try:
            scene, _ = render_world(world)
        except RenderRejection:
            continue
        if not _eyes_visible(scene, world):
            continue
        return world
    raise GenerationError(f"no valid world after {MAX_SAMPLE_TRIES} tries (seed={seed})")


def sample_ambiguous_world(seed: int, params: SimParams = SimParams()) -> WorldSpec:
    """Positive scene with a depth-mismatched distractor billboard planted
    on each participant's projected gaze ray, short of the target."""
    rng = np.random.default_rng(seed)
    base_params = replace(params, p_joint=1.0)
    for _ in range(MAX_SAMPLE_TRIES):
        try:
            world = _attempt_world(rng, base_params, joint=True)
        except _AttemptFailed:
            continue
        if not all(agent_ray_clear(world, a) for a in world.agents):
            continue
        world = _plant_distractors(rng, world)
        if world is None:
            continue
        if not all(agent_ray_clear(world, a, allow_distractors=True)
                   for a in world.agents):
            continue
        try:
            scene, truth = render_world(world)
        except RenderRejection:
            continue
        if not _eyes_visible(scene, world):
            continue
        if truth.has_joint_attention:
            return world
    raise GenerationError(
        f"no valid ambiguous world after {MAX_SAMPLE_TRIES} tries (seed={seed})")


def _plant_distractors(rng, world: WorldSpec) -> Optional[WorldSpec]:
    cam = world.camera
    shared = next(tid for tid, aids in
                  _group_targets(world).items() if len(aids) >= 2)
    participants = [a for a in world.agents if a.target_object_id == shared]
    objects = list(world.objects)
    next_id = 1 + max(o.object_id for o in objects)
    for a in participants:
        target = next(o for o in objects if o.object_id == shared)
        eye, d, g = detection_ray(world, a)
        if d is None:
            return None
        t_rect = _pixel_rect(cam, target.center, target.width_m,
                             target.height_m)
        span_t = _ray_rect_interval(eye, d, t_rect, 0.0)
        if span_t is None:
            return None
        frac = rng.uniform(0.4, 0.6)
        u = eye[0] + frac * span_t[0] * d[0]
        v = eye[1] + frac * span_t[0] * d[1]
        ray_z = _ray_depth_exact(world, a, g, eye, (u, v))
        z_d = ray_z - rng.uniform(1.1, 1.3)
        if z_d <= a.head_center[2] * 0.5 or z_d <= 0.6:
            return None
        size = rng.uniform(0.12, 0.2)
        center = ((u - cam.ppx) * z_d / cam.focal_px,
                  (v - cam.ppy) * z_d / cam.focal_px, z_d)
        objects.append(WorldObject(next_id, "distractor", center, size, size))
        next_id += 1
    # face billboard segment ids shift when objects are added, recompute world
    return WorldSpec(camera=cam, agents=world.agents, objects=objects,
                     background_depth_m=world.background_depth_m,
                     face_width_m=world.face_width_m,
                     face_height_m=world.face_height_m)


def _group_targets(world: WorldSpec) -> Dict[int, set]:
    out: Dict[int, set] = {}
    for a in world.agents:
        if a.target_object_id is not None:
            out.setdefault(a.target_object_id, set()).add(a.agent_id)
    return out


# ---------------------------------------------------------------------------
# noise injection

def _rotate_about(v, axis, angle_rad):
    """Rodrigues rotation of vector v about a unit axis."""
    v = np.asarray(v, dtype=np.float64)
    k = np.asarray(axis, dtype=np.float64)
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return v * c + np.cross(k, v) * s + k * np.dot(k, v) * (1 - c)


def perturb_gaze(rng, g: GazeVector, sigma_deg: float) -> GazeVector:
    """Rotate by |N(0, sigma)| degrees about a random axis orthogonal to g."""
    angle = abs(rng.normal(0.0, sigma_deg))
    gv = np.array([g.gx, g.gy, g.gz])
    while True:
        r = rng.normal(size=3)
        axis = r - np.dot(r, gv) * gv
        n = np.linalg.norm(axis)
        if n > 1e-6:
            axis /= n
            break
    out = _rotate_about(gv, axis, math.radians(angle))
    return GazeVector.from_components(*out)


def apply_noise(scene: SceneInput, spec: NoiseSpec) -> SceneInput:
    """Seeded perturbation of gaze vectors, depth raster and segment masks."""
    if spec.is_identity:
        return scene
    rng = np.random.default_rng(spec.seed)

    faces = list(scene.faces)
    if spec.gaze_sigma_deg > 0:
        faces = [replace(f, gaze=perturb_gaze(rng, f.gaze, spec.gaze_sigma_deg))
                 for f in sorted(faces, key=lambda f: f.face_id)]

    depth = scene.depth
    if spec.depth_sigma_m > 0:
        noisy = depth.values.astype(np.float64) + rng.normal(
            0.0, spec.depth_sigma_m, size=depth.values.shape)
        depth = DepthMap(depth.width, depth.height,
                         np.maximum(noisy, 1e-3).astype(np.float32))

    segments = list(scene.segments)
    if spec.mask_jitter_px > 0:
        w, h = scene.camera.width, scene.camera.height
        jittered = []
        for s in sorted(segments, key=lambda s: s.segment_id):
            k = int(rng.integers(-spec.mask_jitter_px, spec.mask_jitter_px + 1))
            mask = s.mask(w, h)
            if k > 0:
                mask = ndimage.binary_dilation(mask, iterations=k)
            elif k < 0:
                eroded = ndimage.binary_erosion(mask, iterations=-k)
                if eroded.any():
                    mask = eroded
            idx = np.flatnonzero(mask.reshape(-1))
            jittered.append(replace(s, rle=rle_encode(idx)))
        segments = jittered

    return SceneInput(scene_id=scene.scene_id, camera=scene.camera,
                      faces=faces, depth=depth, segments=segments)


# ---------------------------------------------------------------------------
# serialization of worlds and ground truth

def world_to_dict(world: WorldSpec) -> dict:
    return {
        "camera": {"focal_px": world.camera.focal_px, "ppx": world.camera.ppx,
                   "ppy": world.camera.ppy, "width": world.camera.width,
                   "height": world.camera.height},
        "agents": [{"agent_id": a.agent_id, "head_center": list(a.head_center),
                    "target_object_id": a.target_object_id}
                   for a in sorted(world.agents, key=lambda a: a.agent_id)],
        "objects": [{"object_id": o.object_id, "label": o.label,
                     "center": list(o.center), "width_m": o.width_m,
                     "height_m": o.height_m}
                    for o in sorted(world.objects, key=lambda o: o.object_id)],
        "background_depth_m": world.background_depth_m,
        "face_width_m": world.face_width_m,
        "face_height_m": world.face_height_m,
    }


def truth_to_dict(truth: GroundTruth) -> dict:
    return {
        "targets": {str(k): v for k, v in sorted(truth.target_by_agent.items())},
        "events": [{"segment_id": sid, "agent_ids": sorted(aids)}
                   for sid, aids in truth.events],
        "target_masks": {str(sid): [[int(a), int(b)] for a, b in rle]
                         for sid, rle in sorted(truth.target_masks.items())},
    }


def truth_from_dict(d: dict) -> GroundTruth:
    return GroundTruth(
        target_by_agent={int(k): v for k, v in d["targets"].items()},
        events=[(int(e["segment_id"]), frozenset(e["agent_ids"]))
                for e in d["events"]],
        target_masks={int(k): [(int(a), int(b)) for a, b in v]
                      for k, v in d["target_masks"].items()},
    )


def truth_to_json(truth: GroundTruth) -> str:
    return json.dumps(truth_to_dict(truth), separators=(",", ":")) + "\n"


def truth_from_json(text: str) -> GroundTruth:
    return truth_from_dict(json.loads(text))
