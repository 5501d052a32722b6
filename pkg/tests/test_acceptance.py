"""Acceptance gate: one test per release criterion, each printing a
PASS/FAIL line with its measured value."""
import math
import re
import time

import numpy as np
import pytest

from jointgaze.bundle import parse_scene, serialize_scene
from jointgaze.cli import main
from jointgaze.detect import DetectorConfig
from jointgaze.evaluate import evaluate_dataset, run_ablation
from jointgaze.events import analyze_scene
from jointgaze.geometry import (CameraModel, GazeVector, PixelScale,
                                angular_error_deg, pixel_scale_at_face,
                                project_world_point, ray_depth_at_pixel)
from jointgaze.scene import trace_ray_hits
from jointgaze.simulate import (NoiseSpec, SimParams, apply_noise,
                                perturb_gaze, render_world,
                                sample_ambiguous_world, sample_world)

from conftest import corridor_oracle, random_scene

CFG = DetectorConfig()
CAPTION_RE = re.compile(r"^[0-9]+ people are looking at .+$")


def report(criterion, ok, detail):
    print(f"ACCEPTANCE {'PASS' if ok else 'FAIL'} | {criterion} | {detail}")
    assert ok, f"{criterion}: {detail}"


@pytest.fixture(scope="module")
def base_dataset():
    """200 seeded noiseless scenes at the 98/102-style split."""
    pairs = []
    for seed in range(200):
        world = sample_world(seed, SimParams(p_joint=0.49))
        pairs.append(render_world(world, scene_id=f"s{seed:04d}"))
    return pairs


def test_criterion_1_oracle_closure(base_dataset):
    t0 = time.monotonic()
    summary = evaluate_dataset(base_dataset, CFG)
    elapsed = time.monotonic() - t0
    ok = (summary.ja_classification_accuracy == 1.0
          and summary.agent_accuracy == 1.0
          and summary.mean_target_iou == 1.0
          and elapsed <= 10.0)
    report("criterion 1: oracle closure on 200 noiseless scenes", ok,
           f"cls={summary.ja_classification_accuracy}, "
           f"agent={summary.agent_accuracy}, iou={summary.mean_target_iou}, "
           f"runtime={elapsed:.2f}s")


def test_criterion_2_directional_ablation(base_dataset):
    ambiguity = [render_world(sample_ambiguous_world(s), scene_id=f"a{s:03d}")
                 for s in range(100)]
    ab = run_ablation(ambiguity, CFG)
    per_scene_ok = (all(r.target_iou == 1.0 for r in ab.three_d.rows)
                    and all(r.target_iou == 0.0 for r in ab.two_d.rows))
    mixed = ambiguity[:30] + base_dataset[:30]
    ab_mixed = run_ablation(mixed, CFG)
    by_id = {r.scene_id: r for r in ab_mixed.two_d.rows}
    dominance = all(
        r3.target_iou >= by_id[r3.scene_id].target_iou
        for r3 in ab_mixed.three_d.rows if r3.target_iou is not None)
    ok = per_scene_ok and dominance
    report("criterion 2: 3D-vs-2D directional ablation", ok,
           f"ambiguity IOU_3D={ab.three_d.mean_target_iou}, "
           f"IOU_2D={ab.two_d.mean_target_iou}, mixed dominance={dominance}")


def test_criterion_3_brute_force_equivalence():
    rng = np.random.default_rng(2024)
    n_scenes = 0
    worst = 0.0
    for _ in range(120):
        scene = random_scene(rng)
        ex = float(rng.uniform(0, scene.camera.width - 1))
        ey = float(rng.uniform(0, scene.camera.height - 1))
        ang = rng.uniform(0, 2 * math.pi)
        dir2 = (math.cos(ang), math.sin(ang))
        hits = trace_ray_hits(scene, (ex, ey), dir2)
        oracle = corridor_oracle(scene, (ex, ey), dir2)
        assert {h.segment_id for h in hits} == set(oracle)
        for h in hits:
            t_hit = (h.hit_px[0] - ex) * dir2[0] + (h.hit_px[1] - ey) * dir2[1]
            worst = max(worst, abs(t_hit - oracle[h.segment_id][0]))
        n_scenes += 1
    ok = n_scenes >= 100 and worst <= 1.0
    report("criterion 3: ray trace vs corridor oracle", ok,
           f"{n_scenes} scenes, worst distance gap {worst:.3g} px")


def test_criterion_4_geometry_unit_suite():
    g1 = GazeVector.from_components(0.707, 0, 0.707)
    e1 = abs(ray_depth_at_pixel((200, 100), 2.0, g1, PixelScale(0.003),
                                (300, 100)) - (2.0 + 0.3 * (g1.gz / g1.gx)))
    e2 = abs(ray_depth_at_pixel((200, 100), 2.0, GazeVector(0.6, 0, -0.8),
                                PixelScale(0.003), (300, 100)) - 1.6)
    e3 = abs(ray_depth_at_pixel((200, 100), 2.0, GazeVector(0, 0.6, 0.8),
                                PixelScale(0.003), (200, 150)) - 2.2)
    scale_exact = (pixel_scale_at_face(50).meters_per_pixel == 0.15 / 50
                   and pixel_scale_at_face(150).meters_per_pixel == 0.15 / 150)
    cam = CameraModel(500, 320, 240, 640, 480)
    rng = np.random.default_rng(1)
    proj_err = 0.0
    for _ in range(500):
        z = rng.uniform(0.1, 10)
        u, v = rng.uniform(0, 640), rng.uniform(0, 480)
        p = ((u - cam.ppx) * z / cam.focal_px, (v - cam.ppy) * z / cam.focal_px, z)
        u2, v2 = project_world_point(cam, p)
        proj_err = max(proj_err, math.hypot(u2 - u, v2 - v))
    ok = max(e1, e2, e3) <= 1e-9 and scale_exact and proj_err < 1e-6
    report("criterion 4: geometry unit suite", ok,
           f"ray-depth errs ({e1:.2g},{e2:.2g},{e3:.2g}), "
           f"pixel scale exact={scale_exact}, projection err {proj_err:.2g} px")


def test_criterion_5_noise_monotonicity(base_dataset):
    accuracies = []
    for sigma in (0.0, 5.0, 10.0, 20.0):
        pairs = []
        for seed, (scene, truth) in enumerate(base_dataset):
            noisy = apply_noise(scene, NoiseSpec(gaze_sigma_deg=sigma,
                                                 seed=seed))
            pairs.append((noisy, truth))
        accuracies.append(evaluate_dataset(pairs, CFG).agent_accuracy)
    monotone = all(a >= b - 1e-12 for a, b in zip(accuracies, accuracies[1:]))
    ok = monotone and accuracies[0] == 1.0
    report("criterion 5: gaze-noise sweep monotone", ok,
           "agent accuracy " + " >= ".join(f"{a:.3f}" for a in accuracies))


def test_criterion_6_noise_sampler_calibration():
    rng = np.random.default_rng(31337)
    g = GazeVector.from_components(0.3, -0.2, 1.0)
    errs = [angular_error_deg(g, perturb_gaze(rng, g, 10.0))
            for _ in range(10_000)]
    mean = float(np.mean(errs))
    ok = 7.2 <= mean <= 8.8
    report("criterion 6: noise sampler calibration", ok,
           f"mean injected error {mean:.3f} deg at sigma=10 "
           f"(expect ~{10 * math.sqrt(2 / math.pi):.3f})")


def test_criterion_7_caption_conformance():
    n_events = n_captions = 0
    all_match = True
    for seed in range(50):
        scene, _ = render_world(sample_world(seed, SimParams(p_joint=1.0)))
        rep = analyze_scene(scene, CFG)
        n_events += len(rep.events)
        n_captions += len(rep.captions)
        all_match &= all(CAPTION_RE.match(c) for c in rep.captions)
    ok = all_match and n_captions == n_events and n_events > 0
    report("criterion 7: caption template conformance", ok,
           f"{n_captions}/{n_events} events captioned, template match={all_match}")


def test_criterion_8_determinism_and_round_trip(tmp_path):
    for name in ("a", "b"):
        rc = main(["simulate", "--n", "8", "--seed", "21",
                   "--out", str(tmp_path / name)])
        assert rc == 0
    trees = []
    for name in ("a", "b"):
        trees.append({p.relative_to(tmp_path / name): p.read_bytes()
                      for p in sorted((tmp_path / name).rglob("*"))
                      if p.is_file()})
    identical = trees[0] == trees[1]

    rng = np.random.default_rng(77)
    round_trips = 0
    for _ in range(1000):
        scene = random_scene(rng, width=28, height=22)
        blob = serialize_scene(scene)
        if serialize_scene(parse_scene(blob)) == blob:
            round_trips += 1
    ok = identical and round_trips == 1000
    report("criterion 8: determinism and round-trip", ok,
           f"byte-identical trees={identical}, "
           f"round-trips {round_trips}/1000")
