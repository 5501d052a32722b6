import math

import numpy as np
import pytest

from jointgaze.geometry import CameraModel, GazeVector
from jointgaze.scene import (DepthMap, FaceObservation, SceneError, SceneInput,
                             SegmentProposal, region_mean_depth, rle_decode,
                             rle_encode, trace_ray_hits, validate_scene,
                             validate_rle)

from conftest import corridor_oracle, random_scene


def make_scene(width=40, height=30, segments=(), faces=None, depth=None):
    cam = CameraModel(100, width / 2, height / 2, width, height)
    if depth is None:
        depth = np.full((height, width), 2.0, dtype=np.float32)
    if faces is None:
        faces = [FaceObservation(1, (width / 2, height / 2), 20.0,
                                 GazeVector(1, 0, 0))]
    return SceneInput("t", cam, faces, DepthMap(width, height, depth),
                      list(segments))


def rect_segment(sid, x0, y0, x1, y1, width, label=None):
    mask = np.zeros((y1 + 1, width), dtype=bool)
    mask[y0:y1 + 1, x0:x1 + 1] = True
    return SegmentProposal(sid, rle_encode(np.flatnonzero(mask.reshape(-1))),
                           label=label)


class TestRle:
    def test_round_trip(self, rng):
        for _ in range(100):
            idx = np.flatnonzero(rng.random(200) < 0.3)
            if idx.size == 0:
                continue
            assert np.array_equal(rle_decode(rle_encode(idx)), idx)

    def test_runs_merge_consecutive(self):
        assert rle_encode(np.array([3, 4, 5, 9])) == [(3, 3), (9, 1)]

    def test_validate_catches_overlap(self):
        assert validate_rle([(0, 5), (4, 2)], 100) is not None
        assert validate_rle([(0, 5), (5, 2)], 100) is None
        assert validate_rle([(0, 5)], 4) is not None
        assert validate_rle([], 100) is not None


class TestRegionMeanDepth:
    def test_mean_of_four(self):
        depth = np.full((30, 40), 1.0, dtype=np.float32)
        depth[0, 0] = 2; depth[0, 1] = 2; depth[0, 2] = 3; depth[0, 3] = 3
        seg = SegmentProposal(1, [(0, 4)])
        scene = make_scene(depth=depth, segments=[seg])
        assert region_mean_depth(scene.depth, seg) == pytest.approx(2.5)

    def test_single_pixel(self):
        depth = np.full((30, 40), 1.0, dtype=np.float32)
        depth[2, 5] = 4.25
        seg = SegmentProposal(1, [(2 * 40 + 5, 1)])
        assert region_mean_depth(DepthMap(40, 30, depth), seg) == pytest.approx(4.25)

    def test_empty_mask_errors(self):
        with pytest.raises(SceneError):
            region_mean_depth(DepthMap(4, 4, np.ones((4, 4), np.float32)),
                              SegmentProposal(1, []))

    def test_within_min_max(self, rng):
        for _ in range(50):
            scene = random_scene(rng)
            flat = scene.depth.values.reshape(-1)
            for seg in scene.segments:
                m = region_mean_depth(scene.depth, seg)
                vals = flat[seg.pixel_indices()]
                assert vals.min() - 1e-6 <= m <= vals.max() + 1e-6


class TestTraceRayHits:
    def test_single_segment_straddling_ray(self):
        seg = rect_segment(1, 20, 10, 25, 20, width=40)
        scene = make_scene(segments=[seg])
        hits = trace_ray_hits(scene, (5, 15), (1.0, 0.0))
        assert len(hits) == 1
        assert hits[0].segment_id == 1
        assert hits[0].hit_px == (20, 15)
        assert hits[0].pixel_distance == pytest.approx(15.0)

    def test_segment_behind_eye_excluded(self):
        seg = rect_segment(1, 2, 10, 8, 20, width=40)
        scene = make_scene(segments=[seg])
        assert trace_ray_hits(scene, (20, 15), (1.0, 0.0)) == []

    def test_two_segments_ordered(self):
        near = rect_segment(1, 12, 10, 14, 20, width=60)
        far = rect_segment(2, 40, 10, 42, 20, width=60)
        scene = make_scene(width=60, segments=[far, near])
        hits = trace_ray_hits(scene, (2, 15), (1.0, 0.0))
        assert [h.segment_id for h in hits] == [1, 2]
        assert hits[0].pixel_distance < hits[1].pixel_distance
        oracle = corridor_oracle(scene, (2, 15), (1.0, 0.0))
        assert set(oracle) == {1, 2}
        for h in hits:
            assert abs(h.pixel_distance - oracle[h.segment_id][0]) <= 0.75

    def test_self_region_excluded(self):
        seg = rect_segment(1, 0, 0, 39, 29, width=40)  # covers everything
        scene = make_scene(segments=[seg])
        assert trace_ray_hits(scene, (5, 15), (1.0, 0.0)) == []

    def test_matches_corridor_oracle_on_random_scenes(self, rng):
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
                t_oracle, px_oracle = oracle[h.segment_id]
                t_hit = ((h.hit_px[0] - ex) * dir2[0]
                         + (h.hit_px[1] - ey) * dir2[1])
                assert abs(t_hit - t_oracle) <= 1.0

    def test_sorted_and_unique(self, rng):
        for _ in range(50):
            scene = random_scene(rng)
            ang = rng.uniform(0, 2 * math.pi)
            hits = trace_ray_hits(scene,
                                  (scene.camera.width / 2,
                                   scene.camera.height / 2),
                                  (math.cos(ang), math.sin(ang)))
            ids = [h.segment_id for h in hits]
            assert len(ids) == len(set(ids))
            dists = [h.pixel_distance for h in hits]
            assert dists == sorted(dists)


class TestValidateScene:
    def test_valid_scene(self, rng):
        for _ in range(10):
            assert validate_scene(random_scene(rng)) == []

    def test_eye_outside_bounds(self):
        face = FaceObservation(1, (200.0, 15.0), 20.0, GazeVector(1, 0, 0))
        scene = make_scene(faces=[face],
                           segments=[rect_segment(1, 0, 0, 3, 3, width=40)])
        violations = validate_scene(scene)
        assert len(violations) == 1
        assert "eye center" in violations[0]

    def test_zero_depth(self):
        depth = np.full((30, 40), 2.0, dtype=np.float32)
        depth[5, 5] = 0.0
        scene = make_scene(depth=depth)
        assert any("non-positive" in v for v in validate_scene(scene))

    def test_duplicate_segment_id(self):
        segs = [rect_segment(1, 0, 0, 2, 2, width=40),
                rect_segment(1, 5, 5, 7, 7, width=40)]
        scene = make_scene(segments=segs)
        assert any("duplicate segment id" in v for v in validate_scene(scene))
